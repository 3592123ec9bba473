//! Modular arithmetic on word-sized moduli: powers, inverses, Euler's phi,
//! factorization, multiplicative orders, primitive roots, the Legendre
//! symbol, deterministic primality and a segmented prime sieve.
//!
//! Moduli are `u64`; every product is formed in `u128`, so no intermediate
//! ever overflows. Exact (unbounded) quantities live in [`crate::Rational`]
//! and `num_bigint` types instead.

use crate::error::{Error, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Least non-negative residue of a signed value.
#[inline]
pub fn reduce(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m`, or `None` when `gcd(a, m) != 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = ((a % m) as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| reduce(old_s, m))
}

/// `p^e`, or `None` if it does not fit below 2^63.
pub fn checked_pow(p: u64, e: u32) -> Option<u64> {
    let v = p.checked_pow(e)?;
    (v < 1 << 63).then_some(v)
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const TRIAL_LIMIT: u64 = 1 << 16;

/// Deterministic primality for all `u64`: trial division for small inputs,
/// Miller–Rabin with the first twelve prime bases otherwise (a witness set
/// that is exact below 3.3·10^24).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < TRIAL_LIMIT {
        let mut d = 41;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 2;
        }
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn ensure_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| add_mod(mul_mod(x, x, n), c, n);
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut ys = y;
        let mut r = 1u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Prime factorization as `(prime, exponent)` pairs in ascending order.
/// Trial division strips factors below 2^10; Pollard–Brent rho splits
/// whatever remains.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    if n == 0 {
        return Vec::new();
    }
    let mut d = 2u64;
    while d < 1024 && d * d <= n {
        while n % d == 0 {
            primes.push(d);
            n /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        factor_into(n, &mut primes);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Cached data for repeated order computations modulo a fixed `m`.
#[derive(Debug, Clone)]
pub struct OrderContext {
    modulus: u64,
    phi: u64,
    phi_primes: Vec<u64>,
}

impl OrderContext {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidArgument(format!(
                "modulus must be at least 2, got {modulus}"
            )));
        }
        let phi = euler_phi(modulus);
        let phi_primes = factorize(phi).into_iter().map(|(p, _)| p).collect();
        Ok(Self {
            modulus,
            phi,
            phi_primes,
        })
    }

    /// Builds the context for `p^2` from the factorization of `p - 1`,
    /// which callers scanning many primes already have.
    pub fn for_prime_square(p: u64) -> Result<Self> {
        let modulus = checked_pow(p, 2).ok_or(Error::ModulusOverflow {
            base: p,
            exponent: 2,
        })?;
        let mut phi_primes: Vec<u64> = factorize(p - 1).into_iter().map(|(q, _)| q).collect();
        phi_primes.push(p);
        phi_primes.sort_unstable();
        phi_primes.dedup();
        Ok(Self {
            modulus,
            phi: p * (p - 1),
            phi_primes,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn order(&self, a: i128) -> Result<u64> {
        let a = reduce(a, self.modulus);
        if gcd(a, self.modulus) != 1 {
            return Err(Error::NotUnit {
                value: a as i128,
                modulus: self.modulus,
            });
        }
        let mut order = self.phi;
        for &f in &self.phi_primes {
            while order % f == 0 && pow_mod(a, order / f, self.modulus) == 1 {
                order /= f;
            }
        }
        Ok(order)
    }

    /// True iff the unit `a` generates the full unit group. Stops at the
    /// first prime divisor of phi that witnesses a smaller order.
    pub fn generates(&self, a: i128) -> Result<bool> {
        let a = reduce(a, self.modulus);
        if gcd(a, self.modulus) != 1 {
            return Err(Error::NotUnit {
                value: a as i128,
                modulus: self.modulus,
            });
        }
        Ok(self
            .phi_primes
            .iter()
            .all(|&f| pow_mod(a, self.phi / f, self.modulus) != 1))
    }
}

/// Smallest `n >= 1` with `a^n ≡ 1 (mod m)`.
pub fn multiplicative_order(a: i128, m: u64) -> Result<u64> {
    OrderContext::new(m)?.order(a)
}

/// Whether `(Z/mZ)^×` is cyclic: `m ∈ {2, 4, p^k, 2p^k}` with `p` odd.
pub fn has_primitive_roots(m: u64) -> bool {
    match m {
        0 | 1 => false,
        2 | 4 => true,
        _ => {
            let odd = if m % 2 == 0 { m / 2 } else { m };
            if odd % 2 == 0 {
                return false;
            }
            factorize(odd).len() == 1
        }
    }
}

/// Primitive-root test. Moduli without primitive roots are an error rather
/// than `false`, so a structural impossibility is never read as a negative.
pub fn is_primitive_root(g: i128, m: u64) -> Result<bool> {
    if !has_primitive_roots(m) {
        return Err(Error::NoPrimitiveRoots(m));
    }
    OrderContext::new(m)?.generates(g)
}

/// Legendre symbol `(a/p)` by Euler's criterion.
pub fn legendre_symbol(a: i128, p: u64) -> Result<i8> {
    if p == 2 {
        return Err(Error::InvalidArgument(
            "the Legendre symbol needs an odd prime".into(),
        ));
    }
    ensure_prime(p)?;
    let a = reduce(a, p);
    if a == 0 {
        return Ok(0);
    }
    Ok(if pow_mod(a, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// All primes `<= n` (plain sieve of Eratosthenes).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in `[lo, hi)`, sieved in fixed-size segments so memory stays
/// bounded for wide ranges.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    const SEGMENT: u64 = 1 << 18;
    if hi <= 2 || lo >= hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    let base = primes_up_to((hi as f64).sqrt() as u64 + 1);
    let mut out = Vec::new();
    let mut start = lo;
    while start < hi {
        let end = (start + SEGMENT).min(hi);
        let mut composite = vec![false; (end - start) as usize];
        for &p in &base {
            if p * p >= end {
                break;
            }
            let first = (start.div_ceil(p) * p).max(p * p);
            let mut j = first;
            while j < end {
                composite[(j - start) as usize] = true;
                j += p;
            }
        }
        out.extend(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| start + i as u64),
        );
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_match_hand_computation() {
        assert_eq!(multiplicative_order(5, 7).unwrap(), 6);
        assert_eq!(multiplicative_order(7, 25).unwrap(), 4);
        assert_eq!(multiplicative_order(1, 97).unwrap(), 1);
        assert!(matches!(
            multiplicative_order(5, 25),
            Err(Error::NotUnit { .. })
        ));
    }

    #[test]
    fn order_divides_phi_and_is_minimal() {
        for m in 2..300u64 {
            let phi = euler_phi(m);
            for a in 1..m {
                if gcd(a, m) != 1 {
                    continue;
                }
                let ord = multiplicative_order(a as i128, m).unwrap();
                assert_eq!(phi % ord, 0);
                let brute = (1..=phi).find(|&n| pow_mod(a, n, m) == 1).unwrap();
                assert_eq!(ord, brute, "a={a} m={m}");
            }
        }
    }

    #[test]
    fn primitive_root_anomalies() {
        assert!(is_primitive_root(14, 29).unwrap());
        assert!(!is_primitive_root(14, 841).unwrap());
        assert!(is_primitive_root(18, 37).unwrap());
        assert!(!is_primitive_root(18, 1369).unwrap());
        assert!(is_primitive_root(5, 49).unwrap());
        assert!(!is_primitive_root(7, 25).unwrap());
    }

    #[test]
    fn moduli_without_primitive_roots_are_errors() {
        assert_eq!(is_primitive_root(3, 8), Err(Error::NoPrimitiveRoots(8)));
        assert_eq!(is_primitive_root(2, 15), Err(Error::NoPrimitiveRoots(15)));
        assert!(is_primitive_root(3, 2 * 49).is_ok());
        assert!(is_primitive_root(1, 2).unwrap());
        assert!(is_primitive_root(3, 4).unwrap());
    }

    #[test]
    fn primitive_roots_are_non_residues() {
        for p in primes_up_to(100).into_iter().skip(1) {
            for g in 1..p {
                if is_primitive_root(g as i128, p).unwrap() {
                    assert_eq!(legendre_symbol(g as i128, p).unwrap(), -1);
                }
            }
        }
        // The converse fails: 2 is a non-residue mod 17 but has order 8.
        assert_eq!(legendre_symbol(3, 17).unwrap(), -1);
        assert!(!is_primitive_root(2, 17).unwrap());
        assert_eq!(legendre_symbol(2, 17).unwrap(), 1);
        assert_eq!(legendre_symbol(6, 17).unwrap(), -1);
        assert!(!is_primitive_root(8, 17).unwrap());
        assert_eq!(legendre_symbol(8, 17).unwrap(), 1);
    }

    #[test]
    fn legendre_edges() {
        assert_eq!(legendre_symbol(0, 7).unwrap(), 0);
        assert_eq!(legendre_symbol(4, 7).unwrap(), 1);
        assert_eq!(legendre_symbol(-1, 7).unwrap(), -1);
        assert!(legendre_symbol(3, 2).is_err());
        assert_eq!(legendre_symbol(3, 9), Err(Error::NotPrime(9)));
    }

    #[test]
    fn primality_agrees_with_sieve() {
        let sieve = primes_up_to(200_000);
        let mut it = sieve.iter().peekable();
        for n in 0..200_000u64 {
            let expected = it.peek() == Some(&&n);
            if expected {
                it.next();
            }
            assert_eq!(is_prime(n), expected, "n = {n}");
        }
        // strong pseudoprimes to several small bases
        for n in [3_215_031_751u64, 2_152_302_898_747, 3_474_749_660_383, 341_550_071_728_321] {
            assert!(!is_prime(n));
        }
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn segmented_sieve_matches_plain_sieve() {
        let all = primes_up_to(1_000_000);
        let seg = primes_in_range(0, 1_000_001);
        assert_eq!(all, seg);
        let window: Vec<u64> = all.iter().copied().filter(|&p| p >= 500_000).collect();
        assert_eq!(primes_in_range(500_000, 1_000_001), window);
    }

    #[test]
    fn factorization_roundtrips() {
        for n in [1u64, 2, 360, 70_224, 2950, 999_999_937 * 3, 600_851_475_143, (1 << 61) - 1, 4_611_686_014_132_420_609] {
            let f = factorize(n);
            let back = f.iter().fold(1u64, |acc, &(p, e)| acc * p.pow(e));
            assert_eq!(back, n);
            assert!(f.iter().all(|&(p, _)| is_prime(p)));
        }
        assert_eq!(factorize(70_224), vec![(2, 4), (3, 1), (7, 1), (11, 1), (19, 1)]);
    }

    #[test]
    fn inverses() {
        assert_eq!(mod_inverse(7, 9), Some(4));
        assert_eq!(mod_inverse(6, 9), None);
        for a in 1..97 {
            assert_eq!(mul_mod(a, mod_inverse(a, 97).unwrap(), 97), 1);
        }
    }
}
