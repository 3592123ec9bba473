use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::oracle::{coverage_of, verify_certificate, Certificate, CertificateCheck, OracleReport, ResidueSample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DensityStatus {
    Dense,
    NotDense,
    UndecidedByTheory,
}

impl fmt::Display for DensityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DensityStatus::Dense => "Dense",
            DensityStatus::NotDense => "NotDense",
            DensityStatus::UndecidedByTheory => "UndecidedByTheory",
        })
    }
}

/// A decider's answer. `NotDense` always carries a certificate and
/// `Dense` never does; the constructors are the only way to build one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityVerdict {
    status: DensityStatus,
    certificate: Option<Certificate>,
    theorem_tag: String,
}

impl DensityVerdict {
    pub fn dense(tag: impl Into<String>) -> Self {
        Self {
            status: DensityStatus::Dense,
            certificate: None,
            theorem_tag: tag.into(),
        }
    }

    pub fn not_dense(certificate: Certificate, tag: impl Into<String>) -> Self {
        Self {
            status: DensityStatus::NotDense,
            certificate: Some(certificate),
            theorem_tag: tag.into(),
        }
    }

    pub fn undecided(note: impl Into<String>) -> Self {
        Self {
            status: DensityStatus::UndecidedByTheory,
            certificate: None,
            theorem_tag: note.into(),
        }
    }

    pub fn status(&self) -> DensityStatus {
        self.status
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn theorem_tag(&self) -> &str {
        &self.theorem_tag
    }

    pub fn is_dense(&self) -> bool {
        self.status == DensityStatus::Dense
    }

    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status.to_string(),
            "certificate": self.certificate.as_ref().map(|c| serde_json::to_value(c).expect("certificate serializes")),
            "theorem_tag": self.theorem_tag,
        })
    }
}

/// Oracle settings for cross-checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Precision `r` of the coverage grid (modulus `p^r`).
    pub exponent: u32,
    /// Valuation window `V`.
    pub window: u32,
    /// Enumeration cutoff for value samples.
    pub bound: u64,
    /// Maximum number of certificate checks.
    pub budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            exponent: 2,
            window: 2,
            bound: 10_000,
            budget: 10_000_000,
        }
    }
}

/// A verdict set side by side with what the oracle sees.
#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub verdict: DensityVerdict,
    pub report: OracleReport,
    pub certificate_check: Option<CertificateCheck>,
}

impl CrossCheck {
    /// `Dense` must come with full coverage and `NotDense` with a
    /// certificate that survives replay. Nothing is asserted for
    /// undecided verdicts.
    pub fn consistent(&self) -> bool {
        match self.verdict.status() {
            DensityStatus::Dense => self.report.is_covered(),
            DensityStatus::NotDense => self.certificate_check.as_ref().is_some_and(|c| c.holds),
            DensityStatus::UndecidedByTheory => true,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "consistent": self.consistent(),
            "oracle_verdict": self.report.verdict(),
            "missing_count": self.report.missing().len(),
            "certificate_holds": self.certificate_check.as_ref().map(|c| c.holds),
            "certificate_checks": self.certificate_check.as_ref().map(|c| c.checks),
            "violation": self.certificate_check.as_ref().and_then(|c| c.violation.as_ref()).map(|v| v.detail.clone()),
            "report": self.report.to_json(),
        })
    }
}

/// Runs coverage and (for `NotDense`) certificate replay on one sample.
/// The sample must be reduced at a precision at least `config.exponent`
/// and at least what the certificate needs.
pub fn cross_check_sample(verdict: DensityVerdict, sample: &ResidueSample, config: &OracleConfig) -> Result<CrossCheck> {
    let report = coverage_of(&sample.project(config.exponent)?, config.window);
    let certificate_check = match verdict.certificate() {
        Some(cert) => Some(verify_certificate(cert, sample, config.budget)?),
        None => None,
    };
    Ok(CrossCheck {
        verdict,
        report,
        certificate_check,
    })
}
