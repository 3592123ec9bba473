//! p-adic valuations, absolute values and unit parts of exact rationals.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{checked_pow, ensure_prime, mod_inverse, mul_mod};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// `ν_p(x)`: an integer, or infinity for `x = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// A validated prime power `p^r` with the modulus cached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimePower {
    prime: u64,
    exponent: u32,
    modulus: u64,
}

impl PrimePower {
    pub fn new(prime: u64, exponent: u32) -> Result<Self> {
        ensure_prime(prime)?;
        if exponent == 0 {
            return Err(Error::InvalidArgument("prime power exponent must be positive".into()));
        }
        let modulus = checked_pow(prime, exponent).ok_or(Error::ModulusOverflow {
            base: prime,
            exponent,
        })?;
        Ok(Self {
            prime,
            exponent,
            modulus,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Units of `Z/p^rZ` in ascending order.
    pub fn units(&self) -> impl Iterator<Item = u64> + '_ {
        (1..self.modulus).filter(move |u| u % self.prime != 0)
    }

    pub fn unit_count(&self) -> u64 {
        self.modulus / self.prime * (self.prime - 1)
    }

    /// The same prime at a lower exponent.
    pub fn project(&self, exponent: u32) -> Result<Self> {
        Self::new(self.prime, exponent)
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.prime, self.exponent)
    }
}

/// Strips every factor `p` from a nonzero magnitude; returns `(count, rest)`.
pub(crate) fn split_biguint(n: &BigUint, p: u64) -> (u64, BigUint) {
    debug_assert!(!n.is_zero());
    let p_big = BigUint::from(p);
    let mut rest = n.clone();
    let mut count = 0;
    loop {
        let (q, r) = rest.div_rem(&p_big);
        if !r.is_zero() {
            return (count, rest);
        }
        rest = q;
        count += 1;
    }
}

/// `(ν_p(n), n / p^ν)` for a nonzero machine integer.
pub fn split_u64(mut n: u64, p: u64) -> (u32, u64) {
    debug_assert!(n != 0);
    let mut count = 0;
    while n % p == 0 {
        n /= p;
        count += 1;
    }
    (count, n)
}

/// p-adic valuation of an exact rational.
pub fn vp(x: &Rational, p: u64) -> Result<Valuation> {
    ensure_prime(p)?;
    if x.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let (up, _) = split_biguint(&x.numerator(), p);
    let (down, _) = split_biguint(&x.denominator(), p);
    Ok(Valuation::Finite(up as i64 - down as i64))
}

/// Valuation of a nonzero integer, `Infinite` for zero.
pub fn vp_int(n: &BigInt, p: u64) -> Result<Valuation> {
    ensure_prime(p)?;
    if n.is_zero() {
        return Ok(Valuation::Infinite);
    }
    Ok(Valuation::Finite(split_biguint(n.magnitude(), p).0 as i64))
}

/// `‖x‖_p = p^(-ν_p(x))`, with `‖0‖_p = 0`.
pub fn padic_abs(x: &Rational, p: u64) -> Result<Rational> {
    match vp(x, p)? {
        Valuation::Infinite => Ok(Rational::zero()),
        Valuation::Finite(k) => Ok(Rational::pow(&Rational::from(p), -k).expect("p is nonzero")),
    }
}

fn biguint_mod(n: &BigUint, m: u64) -> u64 {
    (n % m).to_u64().expect("residue fits in u64")
}

/// `x·p^(-ν_p(x))` reduced modulo `p^r`, sign included.
pub fn unit_part(x: &Rational, pp: PrimePower) -> Result<u64> {
    if x.is_zero() {
        return Err(Error::ZeroValue);
    }
    let m = pp.modulus();
    let p = pp.prime();
    let (_, num) = split_biguint(&x.numerator(), p);
    let (_, den) = split_biguint(&x.denominator(), p);
    let den_inv = mod_inverse(biguint_mod(&den, m), m).expect("denominator stripped of p is a unit");
    let u = mul_mod(biguint_mod(&num, m), den_inv, m);
    Ok(if x.sign() < 0 { (m - u) % m } else { u })
}

/// Valuation and unit residue of a nonzero integer in one pass.
pub fn integer_profile(n: &BigInt, pp: PrimePower) -> Result<(u64, u64)> {
    if n.is_zero() {
        return Err(Error::ZeroValue);
    }
    let m = pp.modulus();
    let (v, rest) = split_biguint(n.magnitude(), pp.prime());
    let u = biguint_mod(&rest, m);
    let u = if n.sign() == num_bigint::Sign::Minus {
        (m - u) % m
    } else {
        u
    };
    Ok((v, u))
}

/// Valuation and unit residue of a positive machine integer.
pub fn u64_profile(n: u64, pp: PrimePower) -> (u32, u64) {
    let (v, rest) = split_u64(n, pp.prime());
    (v, rest % pp.modulus())
}

/// `ν_p(a - b)` where both sides are given at finite precision as
/// `p^va·ua` and `p^vb·ub` with units known modulo `p^r`. Returns the exact
/// valuation when it is determined, or `Err(lower_bound)` when the units
/// agree to full precision.
pub(crate) fn difference_valuation(
    va: i64,
    ua: u64,
    vb: i64,
    ub: u64,
    pp: PrimePower,
) -> std::result::Result<i64, i64> {
    if va != vb {
        return Ok(va.min(vb));
    }
    let m = pp.modulus();
    let diff = (ua + m - ub % m) % m;
    if diff == 0 {
        return Err(va + pp.exponent() as i64);
    }
    Ok(va + split_u64(diff, pp.prime()).0 as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn valuations() {
        assert_eq!(vp(&q(45, 7), 3).unwrap(), Valuation::Finite(2));
        assert_eq!(vp(&Rational::zero(), 5).unwrap(), Valuation::Infinite);
        assert_eq!(vp(&q(1, 250), 5).unwrap(), Valuation::Finite(-3));
        assert_eq!(vp(&q(-1, 250), 2).unwrap(), Valuation::Finite(-1));
        assert_eq!(vp(&q(1, 2), 4), Err(Error::NotPrime(4)));
    }

    #[test]
    fn absolute_values() {
        assert_eq!(padic_abs(&q(45, 7), 3).unwrap(), q(1, 9));
        assert_eq!(padic_abs(&Rational::zero(), 7).unwrap(), Rational::zero());
        for p in [2, 3, 5, 7, 101] {
            assert_eq!(padic_abs(&Rational::one(), p).unwrap(), Rational::one());
        }
        assert_eq!(padic_abs(&q(1, 250), 5).unwrap(), Rational::from(125i64));
    }

    #[test]
    fn unit_parts() {
        let nine = PrimePower::new(3, 2).unwrap();
        assert_eq!(unit_part(&q(45, 7), nine).unwrap(), 2);
        let pp = PrimePower::new(5, 2).unwrap();
        assert_eq!(unit_part(&Rational::from(-1i64), pp).unwrap(), 24);
        assert_eq!(unit_part(&Rational::from(625i64), pp).unwrap(), 1);
        assert_eq!(unit_part(&Rational::zero(), pp), Err(Error::ZeroValue));
    }

    #[test]
    fn prime_power_validation() {
        assert_eq!(PrimePower::new(9, 2), Err(Error::NotPrime(9)));
        assert!(PrimePower::new(3, 0).is_err());
        assert!(matches!(
            PrimePower::new(3, 40),
            Err(Error::ModulusOverflow { .. })
        ));
        let pp = PrimePower::new(7, 2).unwrap();
        assert_eq!(pp.modulus(), 49);
        assert_eq!(pp.units().count() as u64, pp.unit_count());
    }

    #[test]
    fn difference_valuation_cases() {
        let pp = PrimePower::new(3, 2).unwrap();
        assert_eq!(difference_valuation(1, 2, 0, 1, pp), Ok(0));
        assert_eq!(difference_valuation(1, 4, 1, 1, pp), Ok(2));
        assert_eq!(difference_valuation(1, 5, 1, 1, pp), Ok(1));
        assert_eq!(difference_valuation(1, 1, 1, 1, pp), Err(3));
    }
}
