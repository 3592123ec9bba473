//! Primitive-root relations between pairs of primes: the four-way profile,
//! pattern searches over prime pairs, and witnesses `ℓ = q + 4hp` for the
//! sieve argument.

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{ensure_prime, is_prime, legendre_symbol, mul_mod, pow_mod, primes_in_range, OrderContext};
use crate::error::{Error, Result};

/// Residue and modulus of the primes `p` the sieve argument runs over.
pub const SIEVE_U: u64 = 2951;
pub const SIEVE_V: u64 = 70_224;
pub const SIEVE_QS: [u64; 3] = [7, 11, 19];

/// Primitive-root relations for an ordered pair of odd primes, written
/// `a ≺ b` for "a is a primitive root modulo b".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrimitiveRootProfile {
    pub p: u64,
    pub q: u64,
    pub p_pr_q: bool,
    pub q_pr_p: bool,
    pub p_pr_q2: bool,
    pub q_pr_p2: bool,
}

impl PrimitiveRootProfile {
    pub fn flags(&self) -> [bool; 4] {
        [self.p_pr_q, self.q_pr_p, self.p_pr_q2, self.q_pr_p2]
    }

    /// The same pair seen from `(q, p)`.
    pub fn swapped(&self) -> Self {
        Self {
            p: self.q,
            q: self.p,
            p_pr_q: self.q_pr_p,
            q_pr_p: self.p_pr_q,
            p_pr_q2: self.q_pr_p2,
            q_pr_p2: self.p_pr_q2,
        }
    }

    pub fn matches(&self, pattern: &Pattern) -> bool {
        pattern.matches(self.flags())
    }

    pub fn to_tsv_row(&self) -> String {
        let t = |b: bool| if b { "T" } else { "F" };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.p,
            self.q,
            t(self.p_pr_q),
            t(self.q_pr_p),
            t(self.p_pr_q2),
            t(self.q_pr_p2)
        )
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("profile serializes")
    }
}

pub const TSV_HEADER: &str = "p\tq\tp≺q\tq≺p\tp≺q²\tq≺p²";

/// Per-prime order contexts for `p` and `p^2`.
#[derive(Clone, Debug)]
struct PrimeContext {
    p: u64,
    modp: OrderContext,
    modp2: OrderContext,
}

impl PrimeContext {
    fn new(p: u64) -> Result<Self> {
        Ok(Self {
            p,
            modp: OrderContext::new(p)?,
            modp2: OrderContext::for_prime_square(p)?,
        })
    }

    /// `(a ≺ p, a ≺ p^2)` for `a` coprime to `p`.
    fn relations(&self, a: u64) -> (bool, bool) {
        let mod_p = self.modp.generates(a as i128).expect("a is a unit mod p");
        // a primitive root mod p^2 is one mod p
        let mod_p2 = mod_p && self.modp2.generates(a as i128).expect("a is a unit mod p^2");
        (mod_p, mod_p2)
    }
}

fn check_odd_pair(p: u64, q: u64) -> Result<()> {
    ensure_prime(p)?;
    ensure_prime(q)?;
    if p == 2 || q == 2 {
        return Err(Error::InvalidArgument("profiles need odd primes".into()));
    }
    if p == q {
        return Err(Error::InvalidArgument(format!("p and q must differ (both {p})")));
    }
    Ok(())
}

fn profile_with(cp: &PrimeContext, cq: &PrimeContext) -> PrimitiveRootProfile {
    let (p_pr_q, p_pr_q2) = cq.relations(cp.p);
    let (q_pr_p, q_pr_p2) = cp.relations(cq.p);
    PrimitiveRootProfile {
        p: cp.p,
        q: cq.p,
        p_pr_q,
        q_pr_p,
        p_pr_q2,
        q_pr_p2,
    }
}

pub fn profile(p: u64, q: u64) -> Result<PrimitiveRootProfile> {
    check_odd_pair(p, q)?;
    Ok(profile_with(&PrimeContext::new(p)?, &PrimeContext::new(q)?))
}

/// Profiles for a list of pairs, in input order.
pub fn table(pairs: &[(u64, u64)]) -> Result<Vec<PrimitiveRootProfile>> {
    pairs.iter().map(|&(p, q)| profile(p, q)).collect()
}

pub fn table_tsv(rows: &[PrimitiveRootProfile]) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_tsv_row());
        out.push('\n');
    }
    out
}

/// A pattern over the four relations; `None` matches either value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern(pub [Option<bool>; 4]);

impl Pattern {
    pub fn matches(&self, flags: [bool; 4]) -> bool {
        self.0.iter().zip(flags).all(|(want, got)| want.is_none_or(|w| w == got))
    }

    /// The pattern that selects `(q, p)` exactly when `self` selects `(p, q)`.
    pub fn swapped(&self) -> Self {
        let [a, b, c, d] = self.0;
        Pattern([b, a, d, c])
    }

    /// Parses four symbols from `T`, `F`, `*`, optionally comma-separated,
    /// e.g. `T,T,F,F` or `**TT`.
    pub fn parse(text: &str) -> Result<Self> {
        let symbols: Vec<char> = text.chars().filter(|c| !matches!(c, ',' | ' ' | '(' | ')')).collect();
        if symbols.len() != 4 {
            return Err(Error::InvalidArgument(format!("pattern {text:?} needs four symbols")));
        }
        let mut out = [None; 4];
        for (slot, c) in out.iter_mut().zip(symbols) {
            *slot = match c.to_ascii_uppercase() {
                'T' => Some(true),
                'F' => Some(false),
                '*' => None,
                _ => return Err(Error::InvalidArgument(format!("bad pattern symbol {c:?}"))),
            };
        }
        Ok(Pattern(out))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<&str> = self
            .0
            .iter()
            .map(|x| match x {
                Some(true) => "T",
                Some(false) => "F",
                None => "*",
            })
            .collect();
        f.write_str(&s.join(","))
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidArgument("worker count must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

fn odd_primes(limit: u64) -> Vec<u64> {
    primes_in_range(3, limit.saturating_add(1))
}

/// Matches with `p` drawn from `ps` (indices into `contexts`).
fn scan(contexts: &[PrimeContext], p_range: std::ops::Range<usize>, pattern: &Pattern) -> Vec<PrimitiveRootProfile> {
    p_range
        .into_par_iter()
        .flat_map_iter(|i| {
            let cp = &contexts[i];
            contexts[i + 1..]
                .iter()
                .map(move |cq| profile_with(cp, cq))
                .filter(|prof| prof.matches(pattern))
        })
        .collect()
}

fn contexts(limit: u64) -> Result<Vec<PrimeContext>> {
    odd_primes(limit).into_par_iter().map(PrimeContext::new).collect()
}

/// All pairs of odd primes `p < q <= limit` whose profile matches, in
/// lexicographic order. The result does not depend on `workers`.
pub fn search_pattern(pattern: &Pattern, limit: u64, workers: usize) -> Result<Vec<PrimitiveRootProfile>> {
    pool(workers)?.install(|| {
        let ctx = contexts(limit)?;
        Ok(scan(&ctx, 0..ctx.len(), pattern))
    })
}

/// Progress of a long pattern search: every `p` up to `last_completed_p`
/// has been paired with every larger `q <= limit`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCheckpoint {
    pub pattern: Pattern,
    pub limit: u64,
    pub last_completed_p: u64,
    pub matches: Vec<PrimitiveRootProfile>,
}

impl SearchCheckpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("checkpoint serializes");
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text)
            .and_then(|_| fs::rename(&tmp, path))
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }
}

/// [`search_pattern`] that records progress in `path` after every `chunk`
/// values of `p` and resumes from it when the file already exists.
pub fn search_pattern_checkpointed(
    pattern: &Pattern,
    limit: u64,
    workers: usize,
    path: &Path,
    chunk: usize,
) -> Result<Vec<PrimitiveRootProfile>> {
    let mut state = if path.exists() {
        let state = SearchCheckpoint::load(path)?;
        if state.pattern != *pattern || state.limit != limit {
            return Err(Error::Checkpoint(format!(
                "{} belongs to pattern {} limit {}",
                path.display(),
                state.pattern,
                state.limit
            )));
        }
        state
    } else {
        SearchCheckpoint {
            pattern: *pattern,
            limit,
            last_completed_p: 0,
            matches: Vec::new(),
        }
    };
    pool(workers)?.install(|| {
        let ctx = contexts(limit)?;
        let mut start = ctx.partition_point(|c| c.p <= state.last_completed_p);
        while start < ctx.len() {
            let end = (start + chunk.max(1)).min(ctx.len());
            state.matches.extend(scan(&ctx, start..end, pattern));
            state.last_completed_p = ctx[end - 1].p;
            state.save(path)?;
            start = end;
        }
        Ok(state.matches.clone())
    })
}

/// A prime `ℓ = q + 4hp` with `ℓ ≺ p^2` and `p ⊀ ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SieveWitness {
    pub p: u64,
    pub q: u64,
    pub h: u64,
    pub ell: u64,
}

impl SieveWitness {
    /// Recomputes both relations from scratch with fresh order contexts.
    pub fn verify(&self) -> Result<bool> {
        let ell_ok = self.ell == self.q + 4 * self.h * self.p && is_prime(self.ell) && self.h % self.p != 0;
        if !ell_ok {
            return Ok(false);
        }
        let p2 = self.p * self.p;
        let ell_generates_p2 = OrderContext::new(p2)?.order(self.ell as i128)? == self.p * (self.p - 1);
        let p_generates_ell = OrderContext::new(self.ell)?.order(self.p as i128)? == self.ell - 1;
        Ok(ell_generates_p2 && !p_generates_ell)
    }

    pub fn to_json(&self) -> Value {
        json!({"p": self.p, "q": self.q, "h": self.h, "ell": self.ell})
    }
}

/// Primes `p ≡ 2951 (mod 70224)` with `p <= p_bound`, ascending.
pub fn sieve_primes(p_bound: u64) -> Vec<u64> {
    (0u64..)
        .map(|k| SIEVE_U + k * SIEVE_V)
        .take_while(|&p| p <= p_bound)
        .filter(|&p| is_prime(p))
        .collect()
}

/// Witnesses for every sieve prime `p <= p_bound`, every `q ∈ {7, 11, 19}`
/// and `1 <= h <= h_bound` with `p ∤ h`. Each one is re-verified with
/// [`SieveWitness::verify`] before it is returned.
pub fn sieve_witnesses(p_bound: u64, h_bound: u64, workers: usize) -> Result<Vec<SieveWitness>> {
    pool(workers)?.install(|| {
        let mut out = Vec::new();
        for p in sieve_primes(p_bound) {
            if p.checked_mul(p).is_none() || p.checked_mul(4 * h_bound).and_then(|x| x.checked_add(19)).is_none() {
                return Err(Error::ModulusOverflow { base: p, exponent: 2 });
            }
            let ctx = OrderContext::for_prime_square(p)?;
            for q in SIEVE_QS {
                let found: Vec<SieveWitness> = (1..=h_bound)
                    .into_par_iter()
                    .filter(|h| h % p != 0)
                    .map(|h| SieveWitness { p, q, h, ell: q + 4 * h * p })
                    .filter(|w| is_prime(w.ell))
                    .filter(|w| ctx.generates(w.ell as i128).expect("ell is a unit mod p^2"))
                    .filter(|w| !OrderContext::new(w.ell).and_then(|c| c.generates(p as i128)).unwrap_or(true))
                    .collect();
                for w in found {
                    if !w.verify()? {
                        return Err(Error::Hypothesis(format!("witness {w:?} failed re-verification")));
                    }
                    out.push(w);
                }
            }
        }
        Ok(out)
    })
}

/// `(q + 4hp)^(p-1) ≡ q^(p-1) + 4h(p-1)q^(p-2)·p (mod p^2)`: the binomial
/// expansion behind the sieve step, true for every odd prime `p ∤ q`.
pub fn verify_sieve_identity(p: u64, q: u64, h: u64) -> Result<bool> {
    let (lhs, qp1, term) = sieve_identity_parts(p, q, h)?;
    let m = p * p;
    Ok(lhs == (qp1 + term) % m)
}

/// The reduced form `(q + 4hp)^(p-1) ≡ 1 + 4h(p-1)q^(p-2)·p (mod p^2)`.
/// Holds exactly when `q^(p-1) ≡ 1 (mod p^2)`, i.e. when `q ⊀ p^2` for a
/// primitive root `q` mod `p`.
pub fn verify_sieve_identity_reduced(p: u64, q: u64, h: u64) -> Result<bool> {
    let (lhs, _, term) = sieve_identity_parts(p, q, h)?;
    Ok(lhs == (1 + term) % (p * p))
}

fn sieve_identity_parts(p: u64, q: u64, h: u64) -> Result<(u64, u64, u64)> {
    ensure_prime(p)?;
    if q % p == 0 {
        return Err(Error::InvalidArgument(format!("{p} divides {q}")));
    }
    let m = p.checked_mul(p).ok_or(Error::ModulusOverflow { base: p, exponent: 2 })?;
    let ell = ((q as u128 + 4 * h as u128 * p as u128) % m as u128) as u64;
    let lhs = pow_mod(ell, p - 1, m);
    let qp1 = pow_mod(q, p - 1, m);
    let term = mul_mod(
        mul_mod(mul_mod((4 * (h % m)) % m, p - 1, m), pow_mod(q, p.saturating_sub(2), m), m),
        p,
        m,
    );
    Ok((lhs, qp1, term))
}

/// Legendre symbols `(7/p), (11/p), (19/p), (-3/p)`.
pub fn sieve_conditions(p: u64) -> Result<[i8; 4]> {
    Ok([
        legendre_symbol(7, p)?,
        legendre_symbol(11, p)?,
        legendre_symbol(19, p)?,
        legendre_symbol(-3, p)?,
    ])
}
