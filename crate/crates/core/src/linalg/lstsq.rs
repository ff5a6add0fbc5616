use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, invalid, Error, Result};

/// Relative threshold on `|R_ii| / max_j |R_jj|` below which a column is
/// treated as dependent.
fn rank_tolerance(rows: usize, cols: usize) -> f64 {
    (rows.max(cols) as f64) * f64::EPSILON * 16.0
}

fn check_rank(r: &DMatrix<f64>, rows: usize) -> Result<()> {
    let d = r.ncols();
    let diag: Vec<f64> = (0..d).map(|i| r[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || !(min > rank_tolerance(rows, d) * max) {
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(Error::RankDeficient { condition });
    }
    Ok(())
}

/// Least squares `min ‖A x − b‖₂` by Householder QR. Takes ownership so large
/// matrices are factored in place.
pub fn lstsq_owned(a: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let (m, d) = a.shape();
    check_len("lstsq right-hand side", m, b.len())?;
    if m < d {
        return Err(invalid(alloc::format!(
            "least squares needs at least as many rows as columns ({m} < {d})"
        )));
    }
    let qr = a.qr();
    let r = qr.r();
    check_rank(&r, m)?;
    let mut rhs = DVector::from_column_slice(b);
    qr.q_tr_mul(&mut rhs);
    Ok(solve_upper_triangular(&r, &rhs.as_slice()[..d]))
}

/// Least squares `min ‖A x − b‖₂` for a dense `m × d` matrix with `m ≥ d`.
/// Fails with [`Error::RankDeficient`] (carrying `max|R_ii| / min|R_ii|`)
/// when `A` is numerically rank deficient.
pub fn dense_lstsq(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    lstsq_owned(a.clone(), b)
}

/// `min ‖top·x − b‖² + scale²‖bottom·x‖²`, solved as one stacked QR.
pub fn stacked_lstsq(
    top: &DMatrix<f64>,
    bottom: &DMatrix<f64>,
    scale: f64,
    b: &[f64],
) -> Result<Vec<f64>> {
    check_len("stacked lstsq columns", top.ncols(), bottom.ncols())?;
    check_len("stacked lstsq right-hand side", top.nrows(), b.len())?;
    let (m, d) = top.shape();
    let p = bottom.nrows();
    let mut stacked = DMatrix::zeros(m + p, d);
    stacked.rows_mut(0, m).copy_from(top);
    stacked.rows_mut(m, p).copy_from(&(bottom * scale));
    let mut rhs = alloc::vec![0.0; m + p];
    rhs[..m].copy_from_slice(b);
    lstsq_owned(stacked, &rhs)
}

/// The `d × d` triangular factor of a thin QR of `a`, with a rank check.
pub fn qr_upper(a: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = a.nrows();
    if m < a.ncols() {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let r = a.qr().r();
    check_rank(&r, m)?;
    Ok(r)
}

/// Back substitution for an upper-triangular `R`.
pub fn solve_upper_triangular(r: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let d = r.ncols();
    let mut x = alloc::vec![0.0; d];
    for i in (0..d).rev() {
        let mut s = y[i];
        for j in i + 1..d {
            s -= r[(i, j)] * x[j];
        }
        x[i] = s / r[(i, i)];
    }
    x
}
