use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

/// The Mersenne prime `2^61 − 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    let prod = (a as u128) * (b as u128);
    let lo = (prod as u64) & MERSENNE_61;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

/// A `k`-wise independent family: a uniformly random polynomial of degree
/// `k − 1` over `GF(2^61 − 1)`, seeded.
///
/// Indices passed to evaluation methods are zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamily {
    domain: usize,
    range: usize,
    coeffs: Vec<u64>,
    seed: u64,
}

impl HashFamily {
    /// `independence` is `k`; bucket hashes use 3, sign hashes 4.
    pub fn new(domain: usize, range: usize, independence: usize, seed: u64) -> Result<Self> {
        if range == 0 {
            return Err(invalid("hash range must be positive"));
        }
        if independence == 0 {
            return Err(invalid("hash independence must be at least 1"));
        }
        if domain as u64 >= MERSENNE_61 || range as u64 >= MERSENNE_61 {
            return Err(invalid("hash domain and range must be below 2^61 - 1"));
        }
        let mut rng = rng_from_seed(seed);
        let coeffs = (0..independence)
            .map(|_| rng.random_range(0..MERSENNE_61))
            .collect();
        Ok(HashFamily {
            domain,
            range,
            coeffs,
            seed,
        })
    }

    /// Bucket family (3-wise independent) into `0..range`.
    pub fn bucket(domain: usize, range: usize, seed: u64) -> Result<Self> {
        Self::new(domain, range, 3, seed)
    }

    /// Sign family (4-wise independent).
    pub fn sign(domain: usize, seed: u64) -> Result<Self> {
        Self::new(domain, 2, 4, seed)
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn independence(&self) -> usize {
        self.coeffs.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The polynomial evaluated at `i` in the field.
    pub fn field_value(&self, i: usize) -> u64 {
        let x = i as u64;
        self.coeffs
            .iter()
            .fold(0u64, |acc, &c| addmod(mulmod(acc, x), c))
    }

    /// `field_value(i) mod range`.
    pub fn bucket_of(&self, i: usize) -> usize {
        (self.field_value(i) % self.range as u64) as usize
    }

    /// `+1` when the field value is even, `−1` otherwise.
    pub fn sign_of(&self, i: usize) -> f64 {
        if self.field_value(i) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Bucket table over the whole domain.
    pub fn bucket_table(&self) -> Vec<usize> {
        (0..self.domain).map(|i| self.bucket_of(i)).collect()
    }

    /// Sign table over the whole domain.
    pub fn sign_table(&self) -> Vec<f64> {
        (0..self.domain).map(|i| self.sign_of(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mulmod_matches_wide_arithmetic() {
        let cases = [
            (0, 5),
            (1, MERSENNE_61 - 1),
            (MERSENNE_61 - 1, MERSENNE_61 - 1),
            (123_456_789_012_345, 987_654_321_098_765),
        ];
        for (a, b) in cases {
            let expect = ((a as u128 * b as u128) % MERSENNE_61 as u128) as u64;
            assert_eq!(mulmod(a, b), expect);
        }
    }

    #[test]
    fn evaluation_is_deterministic_and_in_range() {
        let h = HashFamily::bucket(100, 7, 42).unwrap();
        let g = HashFamily::bucket(100, 7, 42).unwrap();
        assert_eq!(h.bucket_table(), g.bucket_table());
        assert!(h.bucket_table().iter().all(|&b| b < 7));
        let other = HashFamily::bucket(100, 7, 43).unwrap();
        assert_ne!(h.bucket_table(), other.bucket_table());
    }

    #[test]
    fn field_value_is_horner() {
        let h = HashFamily::new(10, 5, 3, 1).unwrap();
        let (a, b, c) = (h.coeffs[0] as u128, h.coeffs[1] as u128, h.coeffs[2] as u128);
        let p = MERSENNE_61 as u128;
        for x in 0..10u128 {
            let v = ((a * x % p) * x % p + b * x % p + c) % p;
            assert_eq!(h.field_value(x as usize) as u128, v);
        }
    }

    #[test]
    fn signs_are_balanced() {
        let s = HashFamily::sign(20_000, 9).unwrap();
        let total: f64 = s.sign_table().iter().sum();
        // 4 standard deviations of a ±1 sum
        assert!(total.abs() < 4.0 * (20_000f64).sqrt());
    }

    #[test]
    fn rejects_zero_range() {
        assert!(HashFamily::bucket(4, 0, 0).is_err());
    }
}
