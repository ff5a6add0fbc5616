//! Cauchy-median estimates of column ℓ1 norms of `𝒜UG`.
//!
//! `𝒜e` is viewed as the `n_L × n_R` matrix `M = L·E·Rᵀ` with
//! `𝒜 = L ⊗ R`, `L = A_1 ⊗ … ⊗ A_{q₁}` and `E` the row-major
//! `d_L × d_R` reshape of `e`. A Cauchy sketch `C` with an odd number of
//! rows gives `λ_j = median_l |(C M)_{l j}|`, an estimate of `‖M_{·j}‖₁`,
//! and `λ_e = Σ_j λ_j` estimates `‖𝒜e‖₁`. `C·L` is computed once, so no
//! length-`n` vector is ever formed.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::median;
use crate::sketch::DenseSketch;
use crate::tensor::FactoredMatrix;

/// Smallest `q₁` with `∏_{k ≤ q₁} n_k ≥ √n`.
pub fn choose_split(f: &FactoredMatrix) -> usize {
    let n = f.nrows() as f64;
    let target = num_traits::Float::sqrt(n);
    let mut prod = 1.0;
    for (k, &nk) in f.row_dims().iter().enumerate() {
        prod *= nk as f64;
        if prod >= target {
            return k + 1;
        }
    }
    f.q()
}

/// The two sides of `𝒜 = L ⊗ R` for split `q₁`; `R` is the 1×1 identity
/// when `q₁ = q`.
pub(crate) fn sides(f: &FactoredMatrix, q1: usize) -> Result<(FactoredMatrix, FactoredMatrix)> {
    let (left, right) = f.split_at(q1)?;
    let right = match right {
        Some(r) => r,
        None => FactoredMatrix::new(vec![DMatrix::identity(1, 1)])?,
    };
    Ok((left, right))
}

/// Row-major `d_L × d_R` reshape of `e`.
fn reshape(e: &[f64], dl: usize, dr: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(dl, dr, e)
}

/// Column `j` (zero-based) of `M = L E Rᵀ`: `L·(E·R_{j,·}ᵀ)`.
pub(crate) fn reshape_column0(left: &FactoredMatrix, right: &FactoredMatrix, e: &[f64], j: usize) -> Vec<f64> {
    let (dl, dr) = (left.ncols(), right.ncols());
    let mut rrow = vec![0.0; dr];
    crate::linalg::LinearOperator::row(right, j, &mut rrow);
    let mut inner = vec![0.0; dl];
    for a in 0..dl {
        inner[a] = (0..dr).map(|c| e[a * dr + c] * rrow[c]).sum();
    }
    left.kron_matvec(&inner).expect("inner length is d_L")
}

/// Column `j` (1-based) of the `n_L × n_R` reshape of `𝒜e` for split `q₁`.
/// Stacking all columns as columns of `M` gives `vec_r(M) = 𝒜e`.
pub fn reshape_column(f: &FactoredMatrix, e: &[f64], q1: usize, j: usize) -> Result<Vec<f64>> {
    check_len("reshape coefficient vector", f.ncols(), e.len())?;
    let (left, right) = sides(f, q1)?;
    if j == 0 || j > right.nrows() {
        return Err(Error::IndexOutOfRange {
            context: "reshaped column",
            index: j,
            bound: right.nrows(),
        });
    }
    Ok(reshape_column0(&left, &right, e, j - 1))
}

#[derive(Debug, Clone)]
pub struct ColumnEstimates {
    /// `λ_j` for each sketched column `e`, length `n_R` each.
    pub per_column: Vec<Vec<f64>>,
    /// `λ_e = Σ_j λ_j`.
    pub totals: Vec<f64>,
    pub q1: usize,
    pub cauchy_rows: usize,
}

impl ColumnEstimates {
    pub fn grand_total(&self) -> f64 {
        self.totals.iter().sum()
    }
}

/// `⌈9 ln n⌉`, bumped to the next odd number.
pub fn default_cauchy_rows(n: usize) -> usize {
    let c = num_traits::Float::ceil(9.0 * num_traits::Float::ln(n.max(2) as f64)) as usize;
    if c.is_multiple_of(2) {
        c + 1
    } else {
        c
    }
}

/// Estimates for every column of `ug` (a `d × c_G` matrix). `cauchy` must
/// be a Cauchy sketch with an odd row count and `∏_{k≤q₁} n_k` columns.
pub fn estimate_columns(f: &FactoredMatrix, ug: &DMatrix<f64>, q1: usize, cauchy: &DenseSketch) -> Result<ColumnEstimates> {
    check_len("sketched basis rows", f.ncols(), ug.nrows())?;
    let (left, right) = sides(f, q1)?;
    check_len("cauchy sketch columns", left.nrows(), cauchy.cols)?;
    if cauchy.rows.is_multiple_of(2) {
        return Err(invalid("cauchy sketch needs an odd number of rows"));
    }
    let c = cauchy.materialize();
    let (dl, dr) = (left.ncols(), right.ncols());
    // C·L, row by row through Lᵀ
    let mut cl = DMatrix::zeros(c.nrows(), dl);
    for l in 0..c.nrows() {
        let row: Vec<f64> = c.row(l).iter().copied().collect();
        let v = left.kron_rmatvec(&row)?;
        for a in 0..dl {
            cl[(l, a)] = v[a];
        }
    }
    let nr = right.nrows();
    let mut per_column = Vec::with_capacity(ug.ncols());
    let mut totals = Vec::with_capacity(ug.ncols());
    let mut z = DMatrix::zeros(c.nrows(), nr);
    let mut abs = vec![0.0; c.nrows()];
    for col in 0..ug.ncols() {
        let e: Vec<f64> = ug.column(col).iter().copied().collect();
        let cle = &cl * reshape(&e, dl, dr);
        for l in 0..c.nrows() {
            let row: Vec<f64> = cle.row(l).iter().copied().collect();
            let zr = right.kron_matvec(&row)?;
            for j in 0..nr {
                z[(l, j)] = zr[j];
            }
        }
        let lambdas: Vec<f64> = (0..nr)
            .map(|j| {
                for l in 0..c.nrows() {
                    abs[l] = z[(l, j)].abs();
                }
                median(&abs)
            })
            .collect();
        totals.push(lambdas.iter().sum());
        per_column.push(lambdas);
    }
    Ok(ColumnEstimates {
        per_column,
        totals,
        q1,
        cauchy_rows: c.nrows(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm1;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn random(n: &[usize], d: &[usize], seed: u64) -> FactoredMatrix {
        let mut rng = rng_from_seed(seed);
        FactoredMatrix::new(
            n.iter()
                .zip(d)
                .map(|(&r, &c)| DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn split_is_balanced() {
        assert_eq!(choose_split(&random(&[10, 10], &[1, 1], 0)), 1);
        assert_eq!(choose_split(&random(&[2, 3, 20], &[1, 1, 1], 0)), 3);
        assert_eq!(choose_split(&random(&[4, 4, 4, 4], &[1, 1, 1, 1], 0)), 2);
        assert_eq!(choose_split(&random(&[9], &[1], 0)), 1);
    }

    #[test]
    fn reshape_reproduces_matvec() {
        for seed in 0..20 {
            let f = random(&[3, 4, 2], &[2, 2, 1], seed);
            let e: Vec<f64> = (0..4).map(|i| (seed as f64 + i as f64).sin()).collect();
            let full = f.kron_matvec(&e).unwrap();
            for q1 in 1..=3 {
                let (left, right) = sides(&f, q1).unwrap();
                for j in 0..right.nrows() {
                    let col = reshape_column(&f, &e, q1, j + 1).unwrap();
                    for k in 0..left.nrows() {
                        let expect = full[k * right.nrows() + j];
                        assert!((col[k] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn reshape_edge_cases() {
        let f = random(&[3, 4], &[2, 2], 1);
        assert!(reshape_column(&f, &[0.0; 4], 1, 0).is_err());
        assert!(reshape_column(&f, &[0.0; 4], 1, 5).is_err());
        assert_eq!(reshape_column(&f, &[0.0; 4], 1, 2).unwrap(), vec![0.0; 3]);
        // q = 2, q1 = 1: column j = A1 (E A2[j, :]ᵀ)
        let e = [1.0, 2.0, 3.0, 4.0];
        let a1 = &f.factors()[0];
        let a2 = &f.factors()[1];
        let em = DMatrix::from_row_slice(2, 2, &e);
        let expect = a1 * (em * a2.row(2).transpose());
        let got = reshape_column(&f, &e, 1, 3).unwrap();
        for k in 0..3 {
            assert!((got[k] - expect[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_image_gives_zero_estimates() {
        let f = random(&[8, 8], &[2, 2], 2);
        let ug = DMatrix::zeros(4, 3);
        let est = estimate_columns(&f, &ug, 1, &DenseSketch::cauchy(21, 8, 1)).unwrap();
        assert!(est.totals.iter().all(|&v| v == 0.0));
        assert!(estimate_columns(&f, &ug, 1, &DenseSketch::cauchy(20, 8, 1)).is_err());
    }

    #[test]
    fn single_nonzero_entry_estimate() {
        // 𝒜e = c·e_r: pick factors as identities so e selects one row
        let f = FactoredMatrix::new(vec![DMatrix::identity(5, 5), DMatrix::identity(4, 4)]).unwrap();
        let c = 2.5;
        let mut e = vec![0.0; 20];
        e[7] = c; // row (1, 3) zero-based
        let ug = DMatrix::from_column_slice(20, 1, &e);
        let mut hits = 0;
        let cr = default_cauchy_rows(20);
        for seed in 0..200 {
            let est = estimate_columns(&f, &ug, 1, &DenseSketch::cauchy(cr, 5, seed)).unwrap();
            let nonzero: Vec<usize> = (0..4).filter(|&j| est.per_column[0][j] != 0.0).collect();
            assert_eq!(nonzero, vec![3]);
            let l = est.per_column[0][3];
            if l > 0.5 * c && l < 1.5 * c {
                hits += 1;
            }
        }
        // a single entry is the worst case: the median of |Cauchy| has spread ≈ π/(2√c_R)
        assert!(hits >= 160, "{hits}/200");
    }

    #[test]
    fn totals_track_l1_norm() {
        let f = random(&[16, 16], &[2, 2], 3);
        let n = f.nrows();
        let cr = default_cauchy_rows(n);
        let mut hits = 0;
        for seed in 0..100 {
            let mut rng = rng_from_seed(1000 + seed);
            let e: Vec<f64> = (0..4).map(|_| StandardNormal.sample(&mut rng)).collect();
            let truth = norm1(&f.kron_matvec(&e).unwrap());
            let ug = DMatrix::from_column_slice(4, 1, &e);
            let est = estimate_columns(&f, &ug, 1, &DenseSketch::cauchy(cr, 16, seed)).unwrap();
            let r = est.totals[0] / truth;
            if (0.5..=1.5).contains(&r) {
                hits += 1;
            }
        }
        assert!(hits >= 90, "{hits}/100");
    }
}
