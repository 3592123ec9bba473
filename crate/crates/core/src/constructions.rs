//! Explicit sets with unusual quotient-set behaviour: a 3-AP-free set and a
//! zero-density set whose quotients are dense everywhere, sets dense at a
//! chosen list of primes only, sets of positive lower density, and a
//! two-part partition where neither part is dense at `p`.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::arith::{factorize, is_prime, primes_up_to};
use crate::error::{Error, Result};
use crate::oracle::SetSample;
use crate::padic::split_u64;
use crate::rational::Rational;

/// How far past the previous element the greedy search looks.
pub const GREEDY_SEARCH_WINDOW: u64 = 1_000_000;

/// Pairs `(q, rem)` with `q` a prime power and `0 <= rem < q`: prime powers
/// ascending, residues ascending within each.
#[derive(Clone, Debug)]
pub struct PrimePowerEnumeration {
    q: u64,
    rem: u64,
}

impl PrimePowerEnumeration {
    pub fn new() -> Self {
        Self { q: 2, rem: 0 }
    }
}

impl Default for PrimePowerEnumeration {
    fn default() -> Self {
        Self::new()
    }
}

pub fn is_prime_power(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1
}

/// Prime powers `2, 3, 4, 5, 7, 8, 9, 11, ...`.
pub fn prime_powers() -> impl Iterator<Item = u64> {
    (2u64..).filter(|&n| is_prime_power(n))
}

impl Iterator for PrimePowerEnumeration {
    type Item = (u64, u64);

    fn next(&mut self) -> Option<(u64, u64)> {
        let item = (self.q, self.rem);
        self.rem += 1;
        if self.rem == self.q {
            self.rem = 0;
            self.q = (self.q + 1..).find(|&n| is_prime_power(n)).expect("prime powers are unbounded");
        }
        Some(item)
    }
}

/// First `k` elements of the greedy 3-AP-free set: stage `n` takes the
/// least `a_n > a_{n-1}` with `a_n ≡ rem_n (mod q_n)` that closes no
/// 3-term progression with earlier elements.
pub fn greedy_no3ap_set(k: usize) -> Result<SetSample> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let mut chosen: Vec<u64> = Vec::with_capacity(k);
    let mut members: HashSet<u64> = HashSet::with_capacity(k);
    for (q, rem) in PrimePowerEnumeration::new().take(k) {
        let prev = chosen.last().copied().unwrap_or(0);
        let limit = prev + GREEDY_SEARCH_WINDOW;
        let first = prev + 1 + (rem + q - (prev + 1) % q) % q;
        // The candidate is the largest element, so it can only be the end
        // of a progression x < y < a with x = 2y - a.
        let next = (first..limit)
            .step_by(q as usize)
            .find(|&a| chosen.iter().all(|&y| 2 * y <= a || !members.contains(&(2 * y - a))))
            .ok_or(Error::SearchExhausted { limit })?;
        chosen.push(next);
        members.insert(next);
    }
    let bound = *chosen.last().expect("k >= 1");
    SetSample::new(chosen, format!("greedy_no3ap k={k}"), bound)
}

/// Some `x < y < z` in the sample with `x + z = 2y`, if any.
pub fn contains_3ap(sample: &SetSample) -> Option<(u64, u64, u64)> {
    let xs = sample.elements();
    for (i, &x) in xs.iter().enumerate() {
        for &z in &xs[i + 1..] {
            if (x + z) % 2 == 0 && sample.contains((x + z) / 2) {
                return Some((x, (x + z) / 2, z));
            }
        }
    }
    None
}

/// Elements up to `bound` of the block set: for each prime power `q` in
/// turn take the next `q` integers, then skip the following `q!`.
pub fn zero_density_dense_set(bound: u64) -> Result<SetSample> {
    if bound == 0 {
        return Err(Error::InvalidArgument("bound must be >= 1".into()));
    }
    let bound_big = BigUint::from(bound);
    let mut cursor = BigUint::one();
    let mut elements = Vec::new();
    for q in prime_powers() {
        if cursor > bound_big {
            break;
        }
        let start = cursor.to_u64().expect("cursor <= bound");
        elements.extend((start..start.saturating_add(q)).take_while(|&n| n <= bound));
        let factorial: BigUint = (1..=q).map(BigUint::from).product();
        cursor += q + factorial;
    }
    SetSample::new(elements, "zero_density", bound)
}

/// `ν_q(n) <= 1` for every prime `q <= q_bound` outside `allowed`.
pub fn selective_prime_set_member(n: u64, allowed: &[u64], q_bound: u64) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if let Some(&q) = allowed.iter().find(|&&q| !is_prime(q)) {
        return Err(Error::NotPrime(q));
    }
    Ok(primes_up_to(q_bound)
        .into_iter()
        .filter(|q| !allowed.contains(q))
        .all(|q| split_u64(n, q).0 <= 1))
}

pub fn selective_prime_set(bound: u64, allowed: &[u64], q_bound: u64) -> Result<SetSample> {
    let mut out = Vec::new();
    for n in 1..=bound {
        if selective_prime_set_member(n, allowed, q_bound)? {
            out.push(n);
        }
    }
    SetSample::new(out, format!("selective P={allowed:?} Q<={q_bound}"), bound)
}

/// `{a : ν_{p_k}(a) <= r_k for all k}` with `r_k` minimal such that
/// `2^k <= (1 - alpha) p_k^{r_k}`. Lower density at least `alpha`.
#[derive(Clone, Debug)]
pub struct ThresholdSet {
    alpha: Rational,
    /// `(p_k, r_k)` for the primes computed so far.
    levels: Vec<(u64, u32)>,
}

impl ThresholdSet {
    pub fn new(alpha: Rational) -> Result<Self> {
        if alpha.sign() < 0 || alpha >= Rational::one() {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} is not in [0, 1)")));
        }
        Ok(Self { alpha, levels: Vec::new() })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    fn extend_to(&mut self, k: usize) {
        if self.levels.len() >= k {
            return;
        }
        let num = self.alpha.numerator();
        let den = self.alpha.denominator();
        let slack = &den - &num;
        let mut p = self.levels.last().map_or(1, |&(p, _)| p);
        while self.levels.len() < k {
            p = (p + 1..).find(|&n| is_prime(n)).expect("primes are unbounded");
            let kk = self.levels.len() + 1;
            let lhs = (BigUint::one() << kk) * &den;
            let mut power = BigUint::from(p);
            let mut r = 1;
            while &slack * &power < lhs {
                power *= p;
                r += 1;
            }
            self.levels.push((p, r));
        }
    }

    /// `(p_k, r_k)` for `k = 1..=count`.
    pub fn levels(&mut self, count: usize) -> &[(u64, u32)] {
        self.extend_to(count);
        &self.levels[..count]
    }

    /// Only primes with `2^k <= n` can be violated, since `p_k^{r_k} >= 2^k`.
    pub fn contains(&mut self, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        let relevant = (u64::BITS - n.leading_zeros()) as usize;
        self.extend_to(relevant);
        Ok(self.levels[..relevant].iter().all(|&(p, r)| split_u64(n, p).0 <= r))
    }

    pub fn sample(&mut self, bound: u64) -> Result<SetSample> {
        let mut out = Vec::new();
        for n in 1..=bound {
            if self.contains(n)? {
                out.push(n);
            }
        }
        SetSample::new(out, format!("threshold alpha={}", self.alpha), bound)
    }
}

pub fn threshold_set_member(n: u64, alpha: &Rational) -> Result<bool> {
    ThresholdSet::new(alpha.clone())?.contains(n)
}

/// `min_{start <= N <= bound} |A ∩ [1, N]| / N`.
pub fn empirical_lower_density(sample: &SetSample, start: u64) -> f64 {
    let mut count = sample.elements().iter().take_while(|&&a| a < start).count() as f64;
    let mut idx = count as usize;
    let xs = sample.elements();
    let mut worst = f64::INFINITY;
    for n in start.max(1)..=sample.bound() {
        while idx < xs.len() && xs[idx] == n {
            idx += 1;
            count += 1.0;
        }
        worst = worst.min(count / n as f64);
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityPart {
    /// `ν_p(n)` even.
    A,
    /// `ν_p(n)` odd.
    B,
}

pub fn partition_by_valuation_parity(n: u64, p: u64) -> Result<ParityPart> {
    crate::arith::ensure_prime(p)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    Ok(if split_u64(n, p).0 % 2 == 0 {
        ParityPart::A
    } else {
        ParityPart::B
    })
}

pub fn parity_parts(bound: u64, p: u64) -> Result<(SetSample, SetSample)> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for n in 1..=bound {
        match partition_by_valuation_parity(n, p)? {
            ParityPart::A => a.push(n),
            ParityPart::B => b.push(n),
        }
    }
    Ok((
        SetSample::new(a, format!("parity A p={p}"), bound)?,
        SetSample::new(b, format!("parity B p={p}"), bound)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{coverage_check, dense_in_n_check, valuation_spectrum};
    use crate::padic::PrimePower;

    #[test]
    fn enumeration_order() {
        let first: Vec<_> = PrimePowerEnumeration::new().take(12).collect();
        assert_eq!(
            first,
            [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2), (4, 0), (4, 1), (4, 2), (4, 3), (5, 0), (5, 1), (5, 2)]
        );
        let qs: Vec<u64> = prime_powers().take(10).collect();
        assert_eq!(qs, [2, 3, 4, 5, 7, 8, 9, 11, 13, 16]);
    }

    #[test]
    fn greedy_prefix() {
        let s = greedy_no3ap_set(3).unwrap();
        assert_eq!(s.elements(), &[2, 3, 6]);
        let big = greedy_no3ap_set(200).unwrap();
        assert!(contains_3ap(&big).is_none());
        assert_eq!(&big.elements()[..3], s.elements());
        for (a, (q, rem)) in big.elements().iter().zip(PrimePowerEnumeration::new()) {
            assert_eq!(a % q, rem);
        }
    }

    #[test]
    fn greedy_covers_small_moduli() {
        // 2+3+4+5+7+8+9 pairs cover every q <= 9
        let s = greedy_no3ap_set(38).unwrap();
        for (p, r) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (7, 1)] {
            let hits = dense_in_n_check(&s, PrimePower::new(p, r).unwrap());
            assert!(hits.missing.is_empty(), "{p}^{r}");
        }
    }

    #[test]
    fn three_term_progressions() {
        let s = SetSample::new([1, 2, 3], "t", 3).unwrap();
        assert_eq!(contains_3ap(&s), Some((1, 2, 3)));
        let powers = (0..=20).map(|n| 2u64.pow(n)).chain((0..=20).map(|n| 3u64.pow(n)));
        let s = SetSample::new(powers, "2^n u 3^n", 3u64.pow(20)).unwrap();
        // 1, 2, 3 and 2, 3, 4 both sit inside the powers of 2 and 3.
        assert_eq!(contains_3ap(&s), Some((1, 2, 3)));
        let s = SetSample::new(s.elements().iter().copied().filter(|&n| n != 2), "", 3u64.pow(20)).unwrap();
        assert_eq!(contains_3ap(&s), None);
        let s = SetSample::new([1, 2, 4, 5, 10, 11, 13, 14], "stanley", 14).unwrap();
        assert_eq!(contains_3ap(&s), None);
    }

    #[test]
    fn zero_density_blocks() {
        assert_eq!(zero_density_dense_set(13).unwrap().elements(), &[1, 2, 5, 6, 7]);
        assert_eq!(zero_density_dense_set(4).unwrap().elements(), &[1, 2]);
        let s = zero_density_dense_set(100_000_000).unwrap();
        assert!(s.len() < 100);
    }

    #[test]
    fn selective_members() {
        assert!(!selective_prime_set_member(12, &[3], 10).unwrap());
        assert!(selective_prime_set_member(12, &[2], 10).unwrap());
        assert_eq!(selective_prime_set_member(12, &[4], 10), Err(Error::NotPrime(4)));
        let s = selective_prime_set(10_000, &[5], 100).unwrap();
        assert!(coverage_check(&s, PrimePower::new(5, 2).unwrap(), 2).is_covered());
        assert!(valuation_spectrum(&s, 3).unwrap().iter().all(|&v| v <= 1));
    }

    #[test]
    fn threshold_members() {
        let zero = Rational::zero();
        assert!(!threshold_set_member(4, &zero).unwrap());
        assert!(threshold_set_member(2, &zero).unwrap());
        let half = Rational::new(1, 2).unwrap();
        let mut t = ThresholdSet::new(half.clone()).unwrap();
        assert_eq!(t.levels(3), &[(2, 2), (3, 2), (5, 2)]);
        for alpha in [half, Rational::new(9, 10).unwrap()] {
            assert!(threshold_set_member(1, &alpha).unwrap());
        }
        assert!(ThresholdSet::new(Rational::one()).is_err());
    }

    #[test]
    fn parity_partition() {
        assert_eq!(partition_by_valuation_parity(9, 3).unwrap(), ParityPart::A);
        assert_eq!(partition_by_valuation_parity(3, 3).unwrap(), ParityPart::B);
        assert_eq!(partition_by_valuation_parity(5, 3).unwrap(), ParityPart::A);
        let (a, b) = parity_parts(10_000, 3).unwrap();
        let pp = PrimePower::new(3, 2).unwrap();
        for part in [&a, &b] {
            let report = coverage_check(part, pp, 2);
            assert!(report.missing().iter().any(|&(v, _)| v == 1));
        }
    }
}
