//! Iterative radix-2 FFT over `Complex<f64>`.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // redundant once std is linked into the build
use num_traits::Float;

use crate::error::{invalid, Result};

/// Precomputed twiddles and bit reversal for one power-of-two length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    twiddles: Vec<Complex64>,
    reversed: Vec<usize>,
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(invalid(alloc::format!("fft length {len} is not a power of two")));
        }
        let bits = len.trailing_zeros();
        let reversed = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..len / 2)
            .map(|k| {
                let theta = -2.0 * core::f64::consts::PI * (k as f64) / (len as f64);
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Ok(Fft {
            len,
            twiddles,
            reversed,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len, "fft buffer length");
        for i in 0..self.len {
            let j = self.reversed[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < self.len {
            let stride = self.len / (2 * half);
            for start in (0..self.len).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    /// In-place forward transform `X_k = Σ_j x_j e^{−2πijk/N}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// In-place inverse transform, including the `1/N` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let theta = -2.0 * core::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                        v * Complex64::new(theta.cos(), theta.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for len in [1, 2, 4, 8, 64] {
            let fft = Fft::new(len).unwrap();
            let x: Vec<Complex64> = (0..len)
                .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            fft.forward(&mut y);
            let expect = naive_dft(&x);
            for (a, b) in y.iter().zip(&expect) {
                assert!((a - b).l1_norm() < 1e-12 * len as f64);
            }
            fft.inverse(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).l1_norm() < 1e-13 * len as f64);
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Fft::new(0).is_err());
        assert!(Fft::new(12).is_err());
    }

    #[test]
    fn convolution_of_integer_polynomials() {
        // (1 + 2x)(3 + x^2) = 3 + 6x + x^2 + 2x^3
        let fft = Fft::new(4).unwrap();
        let mut a = vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::default(), Complex64::default()];
        let mut b = vec![Complex64::new(3.0, 0.0), Complex64::default(), Complex64::new(1.0, 0.0), Complex64::default()];
        fft.forward(&mut a);
        fft.forward(&mut b);
        let mut c: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        fft.inverse(&mut c);
        let re: Vec<f64> = c.iter().map(|v| v.re).collect();
        for (got, want) in re.iter().zip([3.0, 6.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
