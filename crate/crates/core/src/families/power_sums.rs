use crate::error::{Error, Result};
use crate::oracle::SetSample;

/// Legendre's criterion: `n` is a sum of three squares unless it has the
/// form `4^i (8j + 7)`.
pub fn is_sum_of_three_squares(n: u64) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut n = n;
    while n % 4 == 0 {
        n /= 4;
    }
    Ok(n % 8 != 7)
}

struct Bits(Vec<u64>);

impl Bits {
    fn zeros(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    /// `self |= src << shift`, truncated to the current length.
    fn or_shifted(&mut self, src: &Bits, shift: usize) {
        let words = shift / 64;
        let bits = shift % 64;
        let n = self.0.len();
        for i in (words..n).rev() {
            let j = i - words;
            let mut w = src.0[j] << bits;
            if bits != 0 && j > 0 {
                w |= src.0[j - 1] >> (64 - bits);
            }
            self.0[i] |= w;
        }
    }
}

/// All `n <= bound` of the form `x_1^e + ... + x_m^e` with `x_i >= 0`,
/// zero excluded. Built one summand at a time over a bitset of
/// `[0, bound]`; powers above the bound are cut off.
pub fn enumerate_power_sums(m: u32, exponent: u32, bound: u64) -> Result<SetSample> {
    if !(2..=3).contains(&exponent) {
        return Err(Error::InvalidArgument(format!(
            "exponent must be 2 or 3, got {exponent}"
        )));
    }
    if m == 0 || bound == 0 {
        return Err(Error::InvalidArgument("need m >= 1 and bound >= 1".into()));
    }
    let len = bound as usize + 1;
    let powers: Vec<usize> = (0u64..)
        .map(|x| x.pow(exponent))
        .take_while(|&v| v <= bound)
        .map(|v| v as usize)
        .collect();

    let mut reach = Bits::zeros(len);
    reach.set(0);
    for _ in 0..m {
        let mut next = Bits::zeros(len);
        for &pw in &powers {
            next.or_shifted(&reach, pw);
        }
        // clear the padding bits past `bound`
        if let Some(last) = next.0.last_mut() {
            let used = len % 64;
            if used != 0 {
                *last &= (1u64 << used) - 1;
            }
        }
        reach = next;
    }
    let label = match exponent {
        2 => format!("S_{m}"),
        _ => format!("C_{m}"),
    };
    SetSample::new((1..len).filter(|&i| reach.get(i)).map(|i| i as u64), label, bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_three_squares() {
        assert!(!is_sum_of_three_squares(7).unwrap());
        assert!(!is_sum_of_three_squares(28).unwrap());
        assert!(is_sum_of_three_squares(14).unwrap());
        for k in 0..=1000 {
            assert!(is_sum_of_three_squares(8 * k + 1).unwrap());
        }
        assert!(is_sum_of_three_squares(0).is_err());
    }

    fn brute(m: u32, e: u32, bound: u64) -> Vec<u64> {
        let powers: Vec<u64> = (0u64..).map(|x| x.pow(e)).take_while(|&v| v <= bound).collect();
        let mut sums = vec![0u64];
        for _ in 0..m {
            let mut next: Vec<u64> = sums
                .iter()
                .flat_map(|&s| powers.iter().map(move |&p| s + p))
                .filter(|&v| v <= bound)
                .collect();
            next.sort_unstable();
            next.dedup();
            sums = next;
        }
        sums.into_iter().filter(|&v| v > 0).collect()
    }

    #[test]
    fn small_cases() {
        let s = enumerate_power_sums(4, 2, 50).unwrap();
        assert_eq!(s.elements(), (1..=50).collect::<Vec<_>>());
        let c = enumerate_power_sums(1, 3, 30).unwrap();
        assert_eq!(c.elements(), &[1, 8, 27]);
        let s3 = enumerate_power_sums(3, 2, 16).unwrap();
        let expected: Vec<u64> = (1..=16).filter(|&n| n != 7 && n != 15).collect();
        assert_eq!(s3.elements(), expected);
    }

    #[test]
    fn bitset_matches_brute_force() {
        for e in [2, 3] {
            for m in 1..=4 {
                for bound in [1u64, 63, 64, 65, 200, 1000] {
                    let got = enumerate_power_sums(m, e, bound).unwrap();
                    assert_eq!(got.elements(), brute(m, e, bound), "m={m} e={e} bound={bound}");
                }
            }
        }
    }

    #[test]
    fn three_squares_agree_with_legendre() {
        let s3 = enumerate_power_sums(3, 2, 10_000).unwrap();
        for n in 1..=10_000u64 {
            assert_eq!(s3.contains(n), is_sum_of_three_squares(n).unwrap(), "n = {n}");
        }
    }
}
