//! Constructive solutions of `x^2 + y^2 ≡ n`, `x^3 + y^3 ≡ m` and
//! `x^3 + y^3 + z^3 ≡ m` modulo prime powers with `x` a unit, built by
//! lifting one digit at a time.
//!
//! Base cases come from exhaustive search (smallest `x`, then `y`, then
//! `z`). At each step the residual `(sum - target) / p^k` is only needed
//! modulo `p`, so everything is computed modulo `p^(k+1)`.

use crate::arith::{add_mod, checked_pow, ensure_prime, mod_inverse, mul_mod, reduce};
use crate::error::{Error, Result};

fn pow_limit(p: u64, r: u32) -> Result<()> {
    checked_pow(p, r + 1)
        .map(|_| ())
        .ok_or(Error::ModulusOverflow { base: p, exponent: r + 1 })
}

fn square(x: u64, m: u64) -> u64 {
    mul_mod(x, x, m)
}

fn cube(x: u64, m: u64) -> u64 {
    mul_mod(mul_mod(x, x, m), x, m)
}

/// `(value - target) / p^k mod p`, where `value ≡ target (mod p^k)` and
/// `value` is known modulo `p^(k+1)`.
fn residual_digit(value: u64, target: i64, p: u64, k: u32) -> u64 {
    let next = p.pow(k + 1);
    let diff = (value + next - reduce(target as i128, next)) % next;
    let pk = p.pow(k);
    debug_assert_eq!(diff % pk, 0, "lifting invariant broken");
    diff / pk
}

/// Returns `(x, y)` with `x^2 + y^2 ≡ n (mod p^r)` and `p ∤ x`, for a
/// prime `p ≡ 1 (mod 4)`.
pub fn lift_two_squares(n: i64, p: u64, r: u32) -> Result<(u64, u64)> {
    ensure_prime(p)?;
    if p % 4 != 1 {
        return Err(Error::Hypothesis(format!("p = {p} is not 1 mod 4")));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    pow_limit(p, r)?;

    let target = reduce(n as i128, p);
    let (mut x, y) = (1..p)
        .flat_map(|x| (0..p).map(move |y| (x, y)))
        .find(|&(x, y)| add_mod(square(x, p), square(y, p), p) == target)
        .expect("x^2 + y^2 represents every residue mod p with x a unit");

    let half = mod_inverse(2, p).expect("p is odd");
    for k in 1..r {
        let m = p.pow(k + 1);
        let ell = residual_digit(add_mod(square(x, m), square(y, m), m), n, p, k);
        let x_inv = mod_inverse(x % p, p).expect("x stays a unit");
        let i = (p - mul_mod(mul_mod(half, x_inv, p), ell, p)) % p;
        x += i * p.pow(k);
    }
    Ok((x, y))
}

const CUBE_SUMS_MOD_7: [u64; 5] = [0, 1, 2, 5, 6];

/// Returns `(x, y)` with `x^3 + y^3 ≡ m (mod 7^r)` and `7 ∤ x`.
pub fn lift_two_cubes_mod7(m: i64, r: u32) -> Result<(u64, u64)> {
    const P: u64 = 7;
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let target = reduce(m as i128, P);
    if !CUBE_SUMS_MOD_7.contains(&target) {
        return Err(Error::Hypothesis(format!(
            "{m} ≡ {target} (mod 7) is not a sum of two cubes mod 7"
        )));
    }
    pow_limit(P, r)?;

    let (mut x, y) = (1..P)
        .flat_map(|x| (0..P).map(move |y| (x, y)))
        .find(|&(x, y)| add_mod(cube(x, P), cube(y, P), P) == target)
        .expect("every admissible residue has a base solution");

    // 5 = 3^-1 mod 7
    for k in 1..r {
        let modulus = P.pow(k + 1);
        let ell = residual_digit(add_mod(cube(x, modulus), cube(y, modulus), modulus), m, P, k);
        let x_inv2 = mod_inverse(square(x % P, P), P).expect("x stays a unit");
        let i = (P - mul_mod(mul_mod(5, ell, P), x_inv2, P)) % P;
        x += i * P.pow(k);
    }
    Ok((x, y))
}

const CUBE_SUMS3_MOD_9: [u64; 7] = [0, 1, 2, 3, 6, 7, 8];

/// Returns `(x, y, z)` with `x^3 + y^3 + z^3 ≡ m (mod 3^r)` and `3 ∤ x`,
/// for `r >= 2`.
///
/// Cubing kills a change of `x` by a multiple of `3^k` modulo `3^(k+1)`,
/// so the step adjusts `x` by `i·3^(k-1)` instead:
/// `(x + i·3^(k-1))^3 ≡ x^3 + x^2·i·3^k (mod 3^(k+1))` for `k >= 2`.
pub fn lift_three_cubes_mod3(m: i64, r: u32) -> Result<(u64, u64, u64)> {
    const P: u64 = 3;
    if r < 2 {
        return Err(Error::InvalidArgument("r must be at least 2".into()));
    }
    let target = reduce(m as i128, 9);
    if !CUBE_SUMS3_MOD_9.contains(&target) {
        return Err(Error::Hypothesis(format!(
            "{m} ≡ {target} (mod 9) is not a sum of three cubes mod 9"
        )));
    }
    pow_limit(P, r)?;

    let (mut x, y, z) = (1..9u64)
        .filter(|x| x % 3 != 0)
        .flat_map(|x| (0..9u64).flat_map(move |y| (0..9u64).map(move |z| (x, y, z))))
        .find(|&(x, y, z)| (cube(x, 9) + cube(y, 9) + cube(z, 9)) % 9 == target)
        .expect("every admissible residue has a base solution");

    for k in 2..r {
        let modulus = P.pow(k + 1);
        let sum = add_mod(add_mod(cube(x, modulus), cube(y, modulus), modulus), cube(z, modulus), modulus);
        let ell = residual_digit(sum, m, P, k);
        // x^2 ≡ 1 (mod 3) for every unit x, so i ≡ -ell.
        let i = (P - ell % P) % P;
        x += i * P.pow(k - 1);
    }
    Ok((x, y, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squares_examples() {
        assert_eq!(lift_two_squares(0, 5, 1).unwrap(), (1, 2));
        let (x, y) = lift_two_squares(7, 13, 3).unwrap();
        let m = 13u64.pow(3);
        assert_eq!((x * x + y * y) % m, 7);
        assert_ne!(x % 13, 0);
        assert!(matches!(lift_two_squares(1, 7, 2), Err(Error::Hypothesis(_))));
        assert!(matches!(lift_two_squares(1, 2, 2), Err(Error::Hypothesis(_))));
        assert_eq!(lift_two_squares(1, 9, 2), Err(Error::NotPrime(9)));
    }

    #[test]
    fn lifting_extends_lower_solutions() {
        for n in 0..125i64 {
            let (x2, y2) = lift_two_squares(n, 5, 2).unwrap();
            let (x3, y3) = lift_two_squares(n, 5, 3).unwrap();
            assert_eq!(x3 % 25, x2);
            assert_eq!(y3, y2);
        }
    }

    #[test]
    fn cubes_mod7_examples() {
        assert_eq!(lift_two_cubes_mod7(2, 1).unwrap(), (1, 1));
        let (x, y) = lift_two_cubes_mod7(6, 3).unwrap();
        assert_eq!((x.pow(3) + y.pow(3)) % 343, 6);
        assert_ne!(x % 7, 0);
        assert!(matches!(lift_two_cubes_mod7(3, 1), Err(Error::Hypothesis(_))));
        assert!(matches!(lift_two_cubes_mod7(-3, 1), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn three_cubes_examples() {
        assert_eq!(lift_three_cubes_mod3(3, 2).unwrap(), (1, 1, 1));
        let (x, y, z) = lift_three_cubes_mod3(8, 4).unwrap();
        assert_eq!((x.pow(3) + y.pow(3) + z.pow(3)) % 81, 8);
        assert_ne!(x % 3, 0);
        assert!(matches!(lift_three_cubes_mod3(4, 2), Err(Error::Hypothesis(_))));
        assert!(lift_three_cubes_mod3(3, 1).is_err());
    }

    #[test]
    fn negative_targets() {
        let (x, y) = lift_two_squares(-1, 13, 4).unwrap();
        let m = 13u64.pow(4);
        assert_eq!((x * x + y * y) % m, m - 1);
        let (x, y) = lift_two_cubes_mod7(-1, 4).unwrap();
        let m = 7u64.pow(4);
        assert_eq!((cube(x, m) + cube(y, m)) % m, m - 1);
    }
}
