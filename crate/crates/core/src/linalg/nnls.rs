//! Lawson–Hanson active-set NNLS.
//!
//! The active-set iterations run on the Gram matrix `AᵀA` so each inner
//! solve costs `O(|P|³)` instead of a fresh QR of `A`; the final passive set
//! is re-solved once with QR on `A` itself to recover full accuracy.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::lstsq::dense_lstsq;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct NnlsOptions {
    /// Outer (column-adding) iteration cap; `None` means `10·d`.
    pub max_iterations: Option<usize>,
}

/// `min ‖A x − b‖₂` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &[f64], opts: NnlsOptions) -> Result<Vec<f64>> {
    let (m, d) = a.shape();
    check_len("nnls right-hand side", m, b.len())?;
    let gram = a.transpose() * a;
    let c = a.tr_mul(&DVector::from_column_slice(b));
    let max_outer = opts.max_iterations.unwrap_or(10 * d).max(1);

    let scale = c.amax().max(gram.amax()).max(f64::MIN_POSITIVE);
    let tol = 1e-11 * scale;

    let mut passive = vec![false; d];
    let mut x = vec![0.0; d];
    let mut w = c.clone();
    let mut outer = 0;
    loop {
        let candidate = (0..d)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let j = match candidate {
            Some(j) if w[j] > tol => j,
            _ => break,
        };
        if outer == max_outer {
            return Err(Error::IterationLimit {
                solver: "nnls",
                iterations: outer,
            });
        }
        outer += 1;
        passive[j] = true;

        let mut inner = 0;
        loop {
            let z = solve_passive(&gram, &c, &passive)?;
            if (0..d).all(|i| !passive[i] || z[i] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in 0..d {
                if passive[i] && z[i] <= 0.0 {
                    let step = x[i] / (x[i] - z[i]);
                    if step < alpha {
                        alpha = step;
                    }
                }
            }
            for i in 0..d {
                x[i] += alpha * (z[i] - x[i]);
                if passive[i] && x[i] <= tol * 1e-3 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            inner += 1;
            if inner > 3 * d + 3 {
                return Err(Error::IterationLimit {
                    solver: "nnls inner loop",
                    iterations: inner,
                });
            }
        }
        let xv = DVector::from_column_slice(&x);
        w = &c - &gram * xv;
    }

    refine(a, b, &mut x);
    Ok(x)
}

fn solve_passive(gram: &DMatrix<f64>, c: &DVector<f64>, passive: &[bool]) -> Result<Vec<f64>> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |r, s| gram[(idx[r], idx[s])]);
    let rhs = DVector::from_fn(k, |r, _| c[idx[r]]);
    let sol = match sub.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => sub.lu().solve(&rhs).ok_or(Error::RankDeficient {
            condition: f64::INFINITY,
        })?,
    };
    let mut z = vec![0.0; passive.len()];
    for (r, &i) in idx.iter().enumerate() {
        z[i] = sol[r];
    }
    Ok(z)
}

/// Re-solve the passive columns with QR; keep the result only if it stays
/// strictly positive.
fn refine(a: &DMatrix<f64>, b: &[f64], x: &mut [f64]) {
    let idx: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    if idx.is_empty() {
        return;
    }
    let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, s| a[(r, idx[s])]);
    if let Ok(z) = dense_lstsq(&sub, b) {
        if z.iter().all(|&v| v > 0.0) {
            for (r, &i) in idx.iter().enumerate() {
                x[i] = z[r];
            }
        }
    }
}
