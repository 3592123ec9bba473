//! Lucas sequences `x_{n+2} = r·x_{n+1} + s·x_n`: first kind `a` (seeds
//! 0, 1) and second kind `b` (seeds 2, r). Terms, rank of appearance, the
//! closed-form p-adic valuation of `a_n`, and density verdicts.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{add_mod, checked_pow, ensure_prime, mul_mod, reduce};
use crate::error::{Error, Result};
use crate::oracle::{Certificate, ElementRef, ResidueEntry, ResidueSample, ValuationConstraint};
use crate::padic::{split_u64, vp_int, PrimePower, Valuation};
use crate::rational::Rational;
use crate::verdict::{cross_check_sample, CrossCheck, DensityVerdict, OracleConfig};

/// Terms fetched exactly when a modular evaluation is inconclusive.
const EXACT_INDEX_LIMIT: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LucasKind {
    First,
    Second,
}

impl LucasKind {
    fn symbol(self) -> char {
        match self {
            LucasKind::First => 'a',
            LucasKind::Second => 'b',
        }
    }

    fn seeds(self, r: i64) -> (i64, i64) {
        match self {
            LucasKind::First => (0, 1),
            LucasKind::Second => (2, r),
        }
    }
}

/// Validated, non-degenerate recurrence parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LucasParams {
    r: i64,
    s: i64,
}

impl LucasParams {
    /// Rejects `s = 0` and parameters whose root ratio is a root of unity.
    ///
    /// With `α + β = r` and `αβ = -s`, the ratio `α/β` satisfies
    /// `α/β + β/α = -(r^2 + 2s)/s`. A root of unity of degree at most 2
    /// over Q has this trace in {-2, -1, 0, 1, 2}, which rearranges to
    /// `r^2 ∈ {0, -s, -2s, -3s, -4s}`.
    pub fn new(r: i64, s: i64) -> Result<Self> {
        if s == 0 {
            return Err(Error::DegenerateLucas { r, s });
        }
        let r2 = r as i128 * r as i128;
        if (0..=4).any(|k| r2 == -k * s as i128) {
            return Err(Error::DegenerateLucas { r, s });
        }
        Ok(Self { r, s })
    }

    pub fn fibonacci() -> Self {
        Self { r: 1, s: 1 }
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn s(&self) -> i64 {
        self.s
    }

    /// `Δ = r^2 + 4s`.
    pub fn delta(&self) -> i128 {
        self.r as i128 * self.r as i128 + 4 * self.s as i128
    }
}

/// `x_n` exactly.
pub fn lucas_term(params: LucasParams, kind: LucasKind, n: u64) -> BigInt {
    let (x0, x1) = kind.seeds(params.r);
    let (r, s) = (BigInt::from(params.r), BigInt::from(params.s));
    let (mut a, mut b) = (BigInt::from(x0), BigInt::from(x1));
    for _ in 0..n {
        let next = &r * &b + &s * &a;
        a = std::mem::replace(&mut b, next);
    }
    a
}

/// `x_0, ..., x_{count-1}` exactly.
pub fn lucas_terms(params: LucasParams, kind: LucasKind, count: usize) -> Vec<BigInt> {
    let (x0, x1) = kind.seeds(params.r);
    let (r, s) = (BigInt::from(params.r), BigInt::from(params.s));
    let mut out: Vec<BigInt> = Vec::with_capacity(count);
    let (mut a, mut b) = (BigInt::from(x0), BigInt::from(x1));
    for _ in 0..count {
        let next = &r * &b + &s * &a;
        out.push(std::mem::replace(&mut a, std::mem::replace(&mut b, next)));
    }
    out
}

type Mat = [[u64; 2]; 2];

fn mat_mul(x: &Mat, y: &Mat, m: u64) -> Mat {
    let mut z = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            z[i][j] = add_mod(mul_mod(x[i][0], y[0][j], m), mul_mod(x[i][1], y[1][j], m), m);
        }
    }
    z
}

/// `x_n mod m` by powering the companion matrix.
pub fn lucas_term_mod(params: LucasParams, kind: LucasKind, n: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (x0, x1) = kind.seeds(params.r);
    let (x0, x1) = (reduce(x0 as i128, m), reduce(x1 as i128, m));
    // (x_n, x_{n+1}) = C^n (x_0, x_1) with C = [[0, 1], [s, r]]
    let mut base: Mat = [[0, 1], [reduce(params.s as i128, m), reduce(params.r as i128, m)]];
    let mut acc: Mat = [[1, 0], [0, 1]];
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(&acc, &base, m);
        }
        base = mat_mul(&base, &base, m);
        e >>= 1;
    }
    add_mod(mul_mod(acc[0][0], x0, m), mul_mod(acc[0][1], x1, m), m)
}

/// `x_0, ..., x_{count-1}` reduced modulo `m`.
pub fn lucas_terms_mod(params: LucasParams, kind: LucasKind, count: usize, m: u64) -> Vec<u64> {
    let (x0, x1) = kind.seeds(params.r);
    let (r, s) = (reduce(params.r as i128, m), reduce(params.s as i128, m));
    let (mut a, mut b) = (reduce(x0 as i128, m), reduce(x1 as i128, m));
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(a);
        let next = add_mod(mul_mod(r, b, m), mul_mod(s, a, m), m);
        (a, b) = (b, next);
    }
    out
}

fn require_coprime(params: LucasParams, p: u64) -> Result<()> {
    ensure_prime(p)?;
    if params.s.unsigned_abs() % p == 0 {
        return Err(Error::Hypothesis(format!("p = {p} divides s = {}", params.s)));
    }
    Ok(())
}

/// Smallest `τ >= 1` with `p | a_τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOfAppearance {
    pub p: u64,
    pub tau: u64,
}

pub fn rank_of_appearance(params: LucasParams, p: u64) -> Result<RankOfAppearance> {
    require_coprime(params, p)?;
    let (r, s) = (reduce(params.r as i128, p), reduce(params.s as i128, p));
    let (mut a, mut b) = (1u64, r); // (a_1, a_2)
    // (a_n, a_{n+1}) mod p is purely periodic when p ∤ s and a_0 = 0, so a
    // zero shows up within p^2 - 1 steps.
    for n in 1..=p * p + 2 {
        if a == 0 {
            return Ok(RankOfAppearance { p, tau: n });
        }
        let next = add_mod(mul_mod(r, b, p), mul_mod(s, a, p), p);
        (a, b) = (b, next);
    }
    unreachable!("rank of appearance exceeds the period bound")
}

/// Largest exponent with `p^e` below 2^62.
fn working_exponent(p: u64) -> u32 {
    let mut e = 1;
    while checked_pow(p, e + 1).is_some_and(|m| m < 1 << 62) {
        e += 1;
    }
    e
}

/// `ν_p(a_k)` for a single index `k >= 1`, via a residue modulo a large
/// power of `p` and exact evaluation when the residue vanishes.
fn term_valuation(params: LucasParams, k: u64, p: u64) -> Result<u32> {
    let e = working_exponent(p);
    let m = checked_pow(p, e).expect("working exponent fits");
    let x = lucas_term_mod(params, LucasKind::First, k, m);
    if x != 0 {
        return Ok(split_u64(x, p).0);
    }
    if k > EXACT_INDEX_LIMIT {
        return Err(Error::PrecisionExhausted {
            prime: p,
            index: k,
            precision: e,
        });
    }
    match vp_int(&lucas_term(params, LucasKind::First, k), p)? {
        Valuation::Finite(v) => Ok(v as u32),
        Valuation::Infinite => unreachable!("non-degenerate sequences have no zero past a_0"),
    }
}

/// The constants the valuation formula for `a_n` depends on, for one
/// `(params, p)` with `p ∤ s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicProfile {
    pub params: LucasParams,
    pub p: u64,
    pub delta_divisible: bool,
    pub tau: u64,
    pub vp_ap: u32,
    pub vp_atau: u32,
    pub vp_aptau: u32,
}

impl PadicProfile {
    pub fn new(params: LucasParams, p: u64) -> Result<Self> {
        let tau = rank_of_appearance(params, p)?.tau;
        Ok(Self {
            params,
            p,
            delta_divisible: params.delta().rem_euclid(p as i128) == 0,
            tau,
            vp_ap: term_valuation(params, p, p)?,
            vp_atau: term_valuation(params, tau, p)?,
            vp_aptau: term_valuation(params, p * tau, p)?,
        })
    }

    /// `ν_p(a_n)` for `n >= 1`.
    pub fn vp(&self, n: u64) -> u32 {
        debug_assert!(n >= 1);
        let p = self.p;
        let (vn, _) = split_u64(n, p);
        if self.delta_divisible {
            if vn > 0 {
                vn + self.vp_ap - 1
            } else {
                0
            }
        } else if n % self.tau != 0 {
            0
        } else if vn > 0 {
            vn + self.vp_aptau - 1
        } else {
            self.vp_atau
        }
    }

    /// `ν_p(b_n) = ν_p(a_{2n}) - ν_p(a_n)` for `n >= 1`; `b_0 = 2`.
    pub fn vp_second(&self, n: u64) -> u32 {
        if n == 0 {
            return u32::from(self.p == 2);
        }
        self.vp(2 * n) - self.vp(n)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tau": self.tau,
            "delta_divisible": self.delta_divisible,
            "vp_ap": self.vp_ap,
            "vp_atau": self.vp_atau,
            "vp_aptau": self.vp_aptau,
        })
    }
}

/// `ν_p(a_n)` from the closed form.
pub fn vp_first_kind(params: LucasParams, p: u64, n: u64) -> Result<Valuation> {
    if n == 0 {
        return Err(Error::InvalidArgument("index must be >= 1".into()));
    }
    Ok(Valuation::Finite(PadicProfile::new(params, p)?.vp(n) as i64))
}

fn divides(p: u64, x: i64) -> bool {
    x.unsigned_abs() % p == 0
}

/// Verdict for `{a_n : n >= 1}`.
pub fn decide_first_kind(params: LucasParams, p: u64) -> Result<DensityVerdict> {
    ensure_prime(p)?;
    Ok(if !divides(p, params.s) {
        DensityVerdict::dense("Thm Lucas(b)")
    } else if !divides(p, params.r) {
        // a_n ≡ r^(n-1) (mod p)
        DensityVerdict::not_dense(
            Certificate::ValuationObstruction {
                prime: p,
                constraint: ValuationConstraint::Constant { value: 0 },
            },
            "Thm Lucas(a)",
        )
    } else {
        DensityVerdict::undecided(format!("p = {p} divides both r and s"))
    })
}

/// Known answers for two parameter sets outside the general criterion.
pub fn ad_hoc_fixture(params: LucasParams, p: u64) -> Option<DensityVerdict> {
    match (params.r, params.s, p) {
        (15, -54, 3) => Some(DensityVerdict::not_dense(
            Certificate::BoundedAwayFrom {
                prime: 3,
                target: Rational::from(3i64),
                radius_exponent: 2,
            },
            "Example Lucas(15,-54)",
        )),
        (20, -75, 5) => Some(DensityVerdict::dense("Example Lucas(20,-75)")),
        _ => None,
    }
}

/// Verdict for `{b_n : n >= 0}` at an odd prime, plus the Lucas numbers at 2.
pub fn decide_second_kind(params: LucasParams, p: u64) -> Result<DensityVerdict> {
    require_coprime(params, p)?;
    if p == 2 {
        if (params.r, params.s) != (1, 1) {
            return Ok(DensityVerdict::undecided("criterion covers odd primes only"));
        }
        // L_n mod 8 is periodic and never 0, so ν_2(L_n) <= 2.
        let hits_zero = period_mod(params, LucasKind::Second, 8).iter().skip(1).any(|&x| x == 0);
        debug_assert!(!hits_zero);
        return Ok(DensityVerdict::not_dense(
            Certificate::ValuationObstruction {
                prime: 2,
                constraint: ValuationConstraint::AtMost { bound: 2 },
            },
            "Cor Lucas(b)",
        ));
    }
    let period = period_mod(params, LucasKind::Second, p);
    Ok(if period.iter().skip(1).any(|&x| x == 0) {
        DensityVerdict::dense("Thm Lucas(c)")
    } else {
        DensityVerdict::not_dense(
            Certificate::ValuationObstruction {
                prime: p,
                constraint: ValuationConstraint::Constant { value: 0 },
            },
            "Thm Lucas(c)",
        )
    })
}

/// `x_0, x_1, ...` modulo `m` up to (and including) the index where the
/// state pair first repeats `(x_0, x_1)`. Requires `gcd(s, m) = 1` so
/// the sequence is purely periodic.
pub fn period_mod(params: LucasParams, kind: LucasKind, m: u64) -> Vec<u64> {
    let (x0, x1) = kind.seeds(params.r);
    let start = (reduce(x0 as i128, m), reduce(x1 as i128, m));
    let (r, s) = (reduce(params.r as i128, m), reduce(params.s as i128, m));
    let (mut a, mut b) = start;
    let mut out = vec![a];
    for _ in 0..m * m + 2 {
        let next = add_mod(mul_mod(r, b, m), mul_mod(s, a, m), m);
        (a, b) = (b, next);
        out.push(a);
        if (a, b) == start {
            break;
        }
    }
    out
}

/// `(b + 1, -b)`: the sequence `a_n = (b^n - 1)/(b - 1)`.
pub fn power_minus_one_family(b: i64) -> Result<LucasParams> {
    if (-1..=1).contains(&b) {
        return Err(Error::DegenerateLucas { r: b + 1, s: -b });
    }
    LucasParams::new(b + 1, -b)
}

fn first_index(kind: LucasKind) -> u64 {
    match kind {
        LucasKind::First => 1,
        LucasKind::Second => 0,
    }
}

/// `count` terms (`a_1..` or `b_0..`) reduced at `pp`, signs kept. When
/// `p ∤ s`, valuations come from the closed form and units from terms
/// modulo `p^(max ν + r)`; otherwise the terms are evaluated exactly.
pub fn oracle_sample(params: LucasParams, kind: LucasKind, pp: PrimePower, count: u64) -> Result<ResidueSample> {
    let p = pp.prime();
    let label = format!("{}({},{})", kind.symbol(), params.r, params.s);
    let start = first_index(kind);
    let indices = start..start + count;
    if divides(p, params.s) {
        let terms = lucas_terms(params, kind, (start + count) as usize);
        let items = indices.map(|n| (ElementRef::Term { sequence: kind.symbol(), index: n }, terms[n as usize].clone()));
        return ResidueSample::from_integers(label, pp, items);
    }
    let profile = PadicProfile::new(params, p)?;
    let valuation = |n: u64| match kind {
        LucasKind::First => profile.vp(n),
        LucasKind::Second => profile.vp_second(n),
    };
    let max_v = indices.clone().map(valuation).max().unwrap_or(0);
    let e = max_v + pp.exponent();
    let m = checked_pow(p, e).ok_or(Error::ModulusOverflow { base: p, exponent: e })?;
    let residues = lucas_terms_mod(params, kind, (start + count) as usize, m);
    let mut entries = Vec::with_capacity(count as usize);
    for n in indices {
        let v = valuation(n);
        let x = residues[n as usize];
        let pv = p.pow(v);
        debug_assert_eq!(x % pv, 0, "closed-form valuation disagrees with residue");
        entries.push(ResidueEntry {
            valuation: v,
            unit: (x / pv) % pp.modulus(),
            element: ElementRef::Term { sequence: kind.symbol(), index: n },
        });
    }
    Ok(ResidueSample::from_entries(label, pp, entries))
}

/// Full verdict used by the CLI and the cross-check: the general criterion,
/// overridden by a fixture where one exists.
pub fn decide(params: LucasParams, kind: LucasKind, p: u64) -> Result<DensityVerdict> {
    match kind {
        LucasKind::First => {
            let v = decide_first_kind(params, p)?;
            Ok(match ad_hoc_fixture(params, p) {
                Some(fixture) if v.certificate().is_none() && !v.is_dense() => fixture,
                _ => v,
            })
        }
        LucasKind::Second => decide_second_kind(params, p),
    }
}

pub fn cross_check(params: LucasParams, kind: LucasKind, p: u64, count: u64, config: &OracleConfig) -> Result<CrossCheck> {
    let verdict = decide(params, kind, p)?;
    let need = verdict.certificate().map_or(1, Certificate::required_exponent);
    let pp = PrimePower::new(p, config.exponent.max(need))?;
    let sample = oracle_sample(params, kind, pp, count)?;
    cross_check_sample(verdict, &sample, config)
}

/// `ν_3(a_{n+1}/a_n - 3)` for the `(15, -54)` fixture, exactly.
pub fn consecutive_ratio_gap(params: LucasParams, p: u64, target: i64, n: u64) -> Result<Valuation> {
    let terms = lucas_terms(params, LucasKind::First, n as usize + 2);
    let (a, b) = (&terms[n as usize], &terms[n as usize + 1]);
    if a.is_zero() {
        return Err(Error::ZeroValue);
    }
    let q = Rational::from(b.clone()).checked_div(&Rational::from(a.clone())).expect("a_n != 0");
    crate::padic::vp(&(q - Rational::from(target)), p)
}
