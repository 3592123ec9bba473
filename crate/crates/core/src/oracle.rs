//! Brute-force, finite-precision evidence about quotient sets.
//!
//! Everything here works on explicit finite samples. Full coverage of the
//! target grid is evidence of density, a miss is evidence against it; the
//! oracle never claims a proof either way. Its second job is to replay the
//! obstruction certificates emitted by the deciders against a sample.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{mod_inverse, mul_mod};
use crate::error::{Error, Result};
use crate::padic::{self, difference_valuation, PrimePower, Valuation};
use crate::rational::Rational;

/// A finite, sorted, duplicate-free set of positive integers standing in
/// for an infinite set `A ⊆ N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSample {
    elements: Vec<u64>,
    label: String,
    bound: u64,
}

impl SetSample {
    pub fn new(elements: impl IntoIterator<Item = u64>, label: impl Into<String>, bound: u64) -> Result<Self> {
        let mut elements: Vec<u64> = elements.into_iter().collect();
        elements.sort_unstable();
        elements.dedup();
        if elements.is_empty() {
            return Err(Error::InvalidArgument("a sample must be nonempty".into()));
        }
        if elements[0] == 0 {
            return Err(Error::InvalidArgument("samples hold positive integers only".into()));
        }
        if let Some(&last) = elements.last() {
            if last > bound {
                return Err(Error::InvalidArgument(format!(
                    "element {last} exceeds the sample bound {bound}"
                )));
            }
        }
        Ok(Self {
            elements,
            label: label.into(),
            bound,
        })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    /// Newline-delimited decimal integers under a `#` header naming the
    /// construction and its bound.
    pub fn to_text(&self) -> String {
        let mut out = format!("# {} bound={}\n", self.label, self.bound);
        for e in &self.elements {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut label = String::from("unlabelled");
        let mut bound = None;
        let mut elements = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(header) = line.strip_prefix('#') {
                let header = header.trim();
                match header.rsplit_once(" bound=") {
                    Some((l, b)) => {
                        label = l.to_string();
                        bound = Some(b.parse().map_err(|_| {
                            Error::InvalidArgument(format!("bad bound in header: {line:?}"))
                        })?);
                    }
                    None => label = header.to_string(),
                }
                continue;
            }
            elements.push(
                line.parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("not a positive integer: {line:?}")))?,
            );
        }
        let bound = bound.unwrap_or_else(|| elements.iter().copied().max().unwrap_or(0));
        Self::new(elements, label, bound)
    }
}

/// Names the element a residue entry came from, for witness reporting.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementRef {
    Value(u64),
    /// Index into a named sequence, e.g. `a_12`.
    Term { sequence: char, index: u64 },
    Power { base: i64, exponent: u32 },
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementRef::Value(v) => write!(f, "{v}"),
            ElementRef::Term { sequence, index } => write!(f, "{sequence}_{index}"),
            ElementRef::Power { base, exponent } => write!(f, "{base}^{exponent}"),
        }
    }
}

impl ElementRef {
    fn to_json(&self) -> Value {
        match self {
            ElementRef::Value(v) => json!(v),
            other => json!(other.to_string()),
        }
    }
}

/// One sample element reduced to what the oracle needs: its valuation and
/// its unit part modulo `p^r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueEntry {
    pub valuation: u32,
    pub unit: u64,
    pub element: ElementRef,
}

/// A sample in reduced form at a fixed prime power. Lets samples whose
/// elements are far too large to store (Lucas terms, high powers) go
/// through the same coverage and certificate machinery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueSample {
    pp: PrimePower,
    label: String,
    entries: Vec<ResidueEntry>,
}

impl ResidueSample {
    pub fn from_sample(sample: &SetSample, pp: PrimePower) -> Self {
        let entries = sample
            .elements()
            .iter()
            .map(|&a| {
                let (valuation, unit) = padic::u64_profile(a, pp);
                ResidueEntry {
                    valuation,
                    unit,
                    element: ElementRef::Value(a),
                }
            })
            .collect();
        Self {
            pp,
            label: sample.label().to_string(),
            entries,
        }
    }

    /// Reduces exact integers (of either sign) into entries. Zero is rejected.
    pub fn from_integers<I>(label: impl Into<String>, pp: PrimePower, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ElementRef, BigInt)>,
    {
        let mut entries = Vec::new();
        for (element, n) in items {
            let (v, unit) = padic::integer_profile(&n, pp)?;
            entries.push(ResidueEntry {
                valuation: u32::try_from(v)
                    .map_err(|_| Error::InvalidArgument("valuation exceeds u32".into()))?,
                unit,
                element,
            });
        }
        Ok(Self::from_entries(label, pp, entries))
    }

    pub fn from_entries(label: impl Into<String>, pp: PrimePower, entries: Vec<ResidueEntry>) -> Self {
        Self {
            pp,
            label: label.into(),
            entries,
        }
    }

    pub fn prime_power(&self) -> PrimePower {
        self.pp
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> &[ResidueEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reduces every unit to a lower precision.
    pub fn project(&self, exponent: u32) -> Result<Self> {
        if exponent > self.pp.exponent() {
            return Err(Error::InvalidArgument(format!(
                "cannot raise precision from {} to {exponent}",
                self.pp.exponent()
            )));
        }
        let pp = self.pp.project(exponent)?;
        let entries = self
            .entries
            .iter()
            .map(|e| ResidueEntry {
                unit: e.unit % pp.modulus(),
                ..e.clone()
            })
            .collect();
        Ok(Self::from_entries(self.label.clone(), pp, entries))
    }

    pub fn valuations(&self) -> BTreeSet<u32> {
        self.entries.iter().map(|e| e.valuation).collect()
    }

    /// First element seen for each `(valuation, unit)` class.
    fn classes(&self) -> BTreeMap<u32, BTreeMap<u64, &ElementRef>> {
        let mut classes: BTreeMap<u32, BTreeMap<u64, &ElementRef>> = BTreeMap::new();
        for e in &self.entries {
            classes
                .entry(e.valuation)
                .or_default()
                .entry(e.unit)
                .or_insert(&e.element);
        }
        classes
    }
}

/// `{ν_p(a) : a ∈ sample}`.
pub fn valuation_spectrum(sample: &SetSample, p: u64) -> Result<BTreeSet<u32>> {
    crate::arith::ensure_prime(p)?;
    Ok(sample
        .elements()
        .iter()
        .map(|&a| padic::split_u64(a, p).0)
        .collect())
}

/// Coverage of the grid `[-V, V] × (Z/p^rZ)^×` by quotients of a sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pp: PrimePower,
    window: u32,
    attained: BTreeMap<i64, BTreeSet<u64>>,
    missing: Vec<(i64, u64)>,
    witnesses: BTreeMap<(i64, u64), (ElementRef, ElementRef)>,
}

impl OracleReport {
    pub fn prime_power(&self) -> PrimePower {
        self.pp
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn attained(&self) -> &BTreeMap<i64, BTreeSet<u64>> {
        &self.attained
    }

    pub fn is_attained(&self, valuation: i64, unit: u64) -> bool {
        self.attained
            .get(&valuation)
            .is_some_and(|units| units.contains(&unit))
    }

    pub fn missing(&self) -> &[(i64, u64)] {
        &self.missing
    }

    pub fn witnesses(&self) -> &BTreeMap<(i64, u64), (ElementRef, ElementRef)> {
        &self.witnesses
    }

    pub fn is_covered(&self) -> bool {
        self.missing.is_empty()
    }

    /// `COVERED` or `MISSING`; never "dense", since finite coverage proves nothing.
    pub fn verdict(&self) -> &'static str {
        if self.is_covered() {
            "COVERED"
        } else {
            "MISSING"
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "prime": self.pp.prime(),
            "exponent": self.pp.exponent(),
            "window": self.window,
            "attained": self.attained.iter().map(|(v, units)| json!({
                "valuation": v,
                "units": units.iter().collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "missing": self.missing.iter().map(|(v, u)| json!([v, u])).collect::<Vec<_>>(),
            "witnesses": self.witnesses.iter().map(|((v, u), (a, b))| json!({
                "valuation": v,
                "unit": u,
                "numerator": a.to_json(),
                "denominator": b.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

type Classes<'a> = BTreeMap<u32, BTreeMap<u64, &'a ElementRef>>;

fn cover_target(classes: &Classes<'_>, target: i64, pp: PrimePower) -> Vec<Option<(ElementRef, ElementRef)>> {
    let m = pp.modulus();
    let need = pp.unit_count();
    let mut found: Vec<Option<(ElementRef, ElementRef)>> = vec![None; m as usize];
    let mut count = 0u64;
    'outer: for (&v1, num) in classes {
        let v2 = v1 as i64 - target;
        let Some(den) = u32::try_from(v2).ok().and_then(|v2| classes.get(&v2)) else {
            continue;
        };
        for (&u2, &e2) in den {
            let inv = mod_inverse(u2, m).expect("entry units are invertible");
            for (&u1, &e1) in num {
                let slot = &mut found[mul_mod(u1, inv, m) as usize];
                if slot.is_none() {
                    *slot = Some((e1.clone(), e2.clone()));
                    count += 1;
                    if count == need {
                        break 'outer;
                    }
                }
            }
        }
    }
    found
}

/// Coverage of a reduced sample. Pairs are enumerated class by class
/// (grouped by valuation, deduplicated by unit), and targets are spread
/// across the current rayon pool; each target's witness is the first hit
/// in a fixed order, so the report does not depend on the worker count.
pub fn coverage_of(sample: &ResidueSample, window: u32) -> OracleReport {
    let pp = sample.prime_power();
    let classes = sample.classes();
    let targets: Vec<i64> = (-(window as i64)..=window as i64).collect();
    let per_target: Vec<(i64, Vec<Option<(ElementRef, ElementRef)>>)> = targets
        .par_iter()
        .map(|&t| (t, cover_target(&classes, t, pp)))
        .collect();

    let mut attained = BTreeMap::new();
    let mut missing = Vec::new();
    let mut witnesses = BTreeMap::new();
    for (t, found) in per_target {
        let mut hit = BTreeSet::new();
        for u in pp.units() {
            match &found[u as usize] {
                Some(pair) => {
                    hit.insert(u);
                    witnesses.insert((t, u), pair.clone());
                }
                None => missing.push((t, u)),
            }
        }
        attained.insert(t, hit);
    }
    OracleReport {
        pp,
        window,
        attained,
        missing,
        witnesses,
    }
}

pub fn coverage_check(sample: &SetSample, pp: PrimePower, window: u32) -> OracleReport {
    coverage_of(&ResidueSample::from_sample(sample, pp), window)
}

/// Residues modulo `p^r` that the sample itself hits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueHits {
    pub dense: bool,
    pub missing: Vec<u64>,
}

pub fn dense_in_n_check(sample: &SetSample, pp: PrimePower) -> ResidueHits {
    let m = pp.modulus();
    let mut seen = vec![false; m as usize];
    for &a in sample.elements() {
        seen[(a % m) as usize] = true;
    }
    let missing: Vec<u64> = (0..m).filter(|&r| !seen[r as usize]).collect();
    ResidueHits {
        dense: missing.is_empty(),
        missing,
    }
}

/// A constraint every element's valuation satisfies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValuationConstraint {
    Constant { value: u32 },
    Congruent { modulus: u32, residue: u32 },
    AtMost { bound: u32 },
}

impl ValuationConstraint {
    pub fn admits(&self, v: u32) -> bool {
        match *self {
            ValuationConstraint::Constant { value } => v == value,
            ValuationConstraint::Congruent { modulus, residue } => v % modulus == residue,
            ValuationConstraint::AtMost { bound } => v <= bound,
        }
    }
}

impl fmt::Display for ValuationConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationConstraint::Constant { value } => write!(f, "= {value}"),
            ValuationConstraint::Congruent { modulus, residue } => {
                write!(f, "≡ {residue} (mod {modulus})")
            }
            ValuationConstraint::AtMost { bound } => write!(f, "<= {bound}"),
        }
    }
}

/// Evidence that a quotient set is not dense in `Q_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    /// Every element's valuation obeys `constraint`, so some valuation is
    /// never attained by a quotient.
    ValuationObstruction { prime: u64, constraint: ValuationConstraint },
    /// Every element is congruent modulo `p^exponent` to one of `allowed`;
    /// `unreachable` names the quotient target the restriction rules out.
    ResidueObstruction {
        prime: u64,
        exponent: u32,
        allowed: Vec<u64>,
        unreachable: Rational,
    },
    /// `ν_p(a/a' - target) < radius_exponent` for every pair of elements.
    BoundedAwayFrom {
        prime: u64,
        target: Rational,
        radius_exponent: u32,
    },
}

impl Certificate {
    pub fn prime(&self) -> u64 {
        match self {
            Certificate::ValuationObstruction { prime, .. }
            | Certificate::ResidueObstruction { prime, .. }
            | Certificate::BoundedAwayFrom { prime, .. } => *prime,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::arith::ensure_prime(self.prime())
            .map_err(|_| Error::MalformedCertificate(format!("{} is not prime", self.prime())))?;
        match self {
            Certificate::ValuationObstruction { constraint, .. } => {
                if let ValuationConstraint::Congruent { modulus, residue } = constraint {
                    if *modulus < 2 || residue >= modulus {
                        return Err(Error::MalformedCertificate(
                            "valuation congruence needs modulus >= 2 and residue < modulus".into(),
                        ));
                    }
                }
            }
            Certificate::ResidueObstruction { exponent, allowed, .. } => {
                if *exponent == 0 || allowed.is_empty() {
                    return Err(Error::MalformedCertificate(
                        "residue obstruction needs a positive exponent and allowed residues".into(),
                    ));
                }
            }
            Certificate::BoundedAwayFrom {
                target,
                radius_exponent,
                ..
            } => {
                if target.is_zero() || *radius_exponent == 0 {
                    return Err(Error::MalformedCertificate(
                        "bounded-away certificate needs a nonzero target and positive radius".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Smallest precision `r` at which a residue sample can decide this
    /// certificate.
    pub fn required_exponent(&self) -> u32 {
        match self {
            Certificate::ValuationObstruction { .. } => 1,
            Certificate::ResidueObstruction { exponent, .. } => *exponent,
            Certificate::BoundedAwayFrom {
                prime,
                target,
                radius_exponent,
            } => {
                let vt = padic::vp(target, *prime)
                    .ok()
                    .and_then(Valuation::finite)
                    .unwrap_or(0);
                (*radius_exponent as i64 - vt).max(1) as u32
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Certificate::ValuationObstruction { prime, constraint } => {
                format!("every element a has nu_{prime}(a) {constraint}")
            }
            Certificate::ResidueObstruction {
                prime,
                exponent,
                allowed,
                unreachable,
            } => format!(
                "every element is congruent mod {prime}^{exponent} to one of {allowed:?}; rules out quotients near {unreachable}"
            ),
            Certificate::BoundedAwayFrom {
                prime,
                target,
                radius_exponent,
            } => format!(
                "every quotient q has nu_{prime}(q - {target}) < {radius_exponent}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub elements: Vec<ElementRef>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateCheck {
    /// No violation among the checks performed.
    pub holds: bool,
    pub checks: u64,
    /// False when the budget ran out before every check was made.
    pub complete: bool,
    pub violation: Option<Violation>,
}

/// Replays a certificate against a reduced sample, stopping after `budget`
/// element or class-pair checks.
pub fn verify_certificate(cert: &Certificate, sample: &ResidueSample, budget: u64) -> Result<CertificateCheck> {
    cert.validate()?;
    if budget == 0 {
        return Err(Error::InvalidArgument("verification budget must be positive".into()));
    }
    let pp = sample.prime_power();
    if cert.prime() != pp.prime() {
        return Err(Error::InvalidArgument(format!(
            "certificate is for p = {} but the sample is reduced at p = {}",
            cert.prime(),
            pp.prime()
        )));
    }
    if cert.required_exponent() > pp.exponent() {
        return Err(Error::InvalidArgument(format!(
            "certificate needs precision p^{}, sample has p^{}",
            cert.required_exponent(),
            pp.exponent()
        )));
    }

    let mut checks = 0u64;
    let fail = |checks, elements, detail| {
        Ok(CertificateCheck {
            holds: false,
            checks,
            complete: false,
            violation: Some(Violation { elements, detail }),
        })
    };

    match cert {
        Certificate::ValuationObstruction { constraint, prime } => {
            for e in sample.entries() {
                if checks == budget {
                    return Ok(partial(checks));
                }
                checks += 1;
                if !constraint.admits(e.valuation) {
                    return fail(
                        checks,
                        vec![e.element.clone()],
                        format!("nu_{prime}({}) = {} violates {constraint}", e.element, e.valuation),
                    );
                }
            }
        }
        Certificate::ResidueObstruction {
            prime,
            exponent,
            allowed,
            ..
        } => {
            let m = crate::arith::checked_pow(*prime, *exponent).expect("validated against sample precision");
            for e in sample.entries() {
                if checks == budget {
                    return Ok(partial(checks));
                }
                checks += 1;
                let residue = if e.valuation >= *exponent {
                    0
                } else {
                    let scale = prime.pow(e.valuation);
                    mul_mod(scale, e.unit % m, m)
                };
                if !allowed.contains(&residue) {
                    return fail(
                        checks,
                        vec![e.element.clone()],
                        format!("{} ≡ {residue} (mod {m}), outside {allowed:?}", e.element),
                    );
                }
            }
        }
        Certificate::BoundedAwayFrom {
            prime,
            target,
            radius_exponent,
        } => {
            let vt = padic::vp(target, *prime)?.finite().expect("target is nonzero");
            let ut = padic::unit_part(target, pp)?;
            let m = pp.modulus();
            let classes: Vec<(u32, u64, &ElementRef)> = sample
                .classes()
                .into_iter()
                .flat_map(|(v, units)| units.into_iter().map(move |(u, e)| (v, u, e)))
                .collect();
            for &(v1, u1, e1) in &classes {
                for &(v2, u2, e2) in &classes {
                    if checks == budget {
                        return Ok(partial(checks));
                    }
                    checks += 1;
                    let v = v1 as i64 - v2 as i64;
                    let u = mul_mod(u1, mod_inverse(u2, m).expect("unit"), m);
                    let close = match difference_valuation(v, u, vt, ut, pp) {
                        Ok(k) => k >= *radius_exponent as i64,
                        Err(lower) => lower >= *radius_exponent as i64,
                    };
                    if close {
                        return fail(
                            checks,
                            vec![e1.clone(), e2.clone()],
                            format!(
                                "nu_{prime}({e1}/{e2} - {target}) >= {radius_exponent}"
                            ),
                        );
                    }
                }
            }
        }
    }
    Ok(CertificateCheck {
        holds: true,
        checks,
        complete: true,
        violation: None,
    })
}

fn partial(checks: u64) -> CertificateCheck {
    CertificateCheck {
        holds: true,
        checks,
        complete: false,
        violation: None,
    }
}

/// Convenience wrapper: reduces a plain sample at the precision the
/// certificate needs (at least `p^2`) and verifies it.
pub fn verify_certificate_on(cert: &Certificate, sample: &SetSample, budget: u64) -> Result<CertificateCheck> {
    cert.validate()?;
    let pp = PrimePower::new(cert.prime(), cert.required_exponent().max(2))?;
    verify_certificate(cert, &ResidueSample::from_sample(sample, pp), budget)
}
