//! Dense brute-force references. Everything here materializes the full
//! `n × d` design and refuses to do so past an explicit entry cap.

mod simplex;

pub use simplex::{bounded_simplex, SimplexSolution};

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // redundant once std is linked into the build
use num_traits::Float;

use crate::error::{check_len, Error, Result};
use crate::linalg::{dense_lstsq, nnls, norm1, norm2, residual, stacked_lstsq, NnlsOptions};
use crate::sketch::TensorSketchSpec;
use crate::tensor::FactoredMatrix;

/// An exact optimum and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    /// `‖𝒜x − b‖₂` for least squares and NNLS, `‖𝒜x − b‖₁` for ℓ1,
    /// `‖𝒜x − b‖₂² + λ‖Lx‖₂²` for the penalized problem.
    pub objective: f64,
}

fn check_cap(rows: usize, cols: usize, cap: usize) -> Result<()> {
    let requested = rows.checked_mul(cols).ok_or(Error::Overflow)?;
    if requested > cap {
        Err(Error::OracleCapExceeded { requested, cap })
    } else {
        Ok(())
    }
}

/// The full Kronecker product as a dense matrix.
pub fn materialize(f: &FactoredMatrix, cap: usize) -> Result<DMatrix<f64>> {
    check_cap(f.nrows(), f.ncols(), cap)?;
    let mut out = DMatrix::from_element(1, 1, 1.0);
    for a in f.factors() {
        out = out.kronecker(a);
    }
    Ok(out)
}

/// The `m × n` TensorSketch matrix: one `±1` per column.
pub fn sketch_matrix(spec: &TensorSketchSpec, cap: usize) -> Result<DMatrix<f64>> {
    let n = spec
        .domains()
        .iter()
        .try_fold(1usize, |acc, &x| acc.checked_mul(x))
        .ok_or(Error::Overflow)?;
    check_cap(spec.m(), n, cap)?;
    let mut out = DMatrix::zeros(spec.m(), n);
    let mut tuple = vec![0usize; spec.q()];
    for col in 0..n {
        let (h, s) = spec.bucket_and_sign(&tuple);
        out[(h, col)] = s;
        for k in (0..spec.q()).rev() {
            tuple[k] += 1;
            if tuple[k] < spec.domains()[k] {
                break;
            }
            tuple[k] = 0;
        }
    }
    Ok(out)
}

pub fn oracle_l2(f: &FactoredMatrix, b: &[f64], cap: usize) -> Result<OracleSolution> {
    check_len("oracle right-hand side", f.nrows(), b.len())?;
    let a = materialize(f, cap)?;
    let x = dense_lstsq(&a, b)?;
    let objective = norm2(&residual(&a, &x, b));
    Ok(OracleSolution { x, objective })
}

pub fn oracle_nnls(f: &FactoredMatrix, b: &[f64], cap: usize) -> Result<OracleSolution> {
    check_len("oracle right-hand side", f.nrows(), b.len())?;
    let a = materialize(f, cap)?;
    let x = nnls(&a, b, NnlsOptions::default())?;
    let objective = norm2(&residual(&a, &x, b));
    Ok(OracleSolution { x, objective })
}

/// `min ‖Ax − b‖₂² + λ‖Lx‖₂²` by one stacked QR.
pub fn oracle_pspline(
    f: &FactoredMatrix,
    penalty: &DMatrix<f64>,
    lambda: f64,
    b: &[f64],
    cap: usize,
) -> Result<OracleSolution> {
    check_len("oracle right-hand side", f.nrows(), b.len())?;
    let a = materialize(f, cap)?;
    let x = stacked_lstsq(&a, penalty, lambda.max(0.0).sqrt(), b)?;
    let fit = norm2(&residual(&a, &x, b));
    let pen = norm2((penalty * DVector::from_column_slice(&x)).as_slice());
    Ok(OracleSolution {
        x,
        objective: fit * fit + lambda * pen * pen,
    })
}

/// Exact weighted ℓ1 regression on a dense matrix through the LP dual
/// `min bᵀz  s.t.  Aᵀz = Aᵀw,  0 ≤ z ≤ 2w` (with `z = y + w`). The primal
/// solution interpolates the rows left basic at the optimum.
pub fn dense_l1(a: &DMatrix<f64>, b: &[f64], weights: Option<&[f64]>) -> Result<OracleSolution> {
    let (n, d) = a.shape();
    check_len("l1 right-hand side", n, b.len())?;
    let w: Vec<f64> = match weights {
        Some(w) => {
            check_len("l1 weights", n, w.len())?;
            w.to_vec()
        }
        None => vec![1.0; n],
    };
    let at = a.transpose();
    let h = &at * DVector::from_column_slice(&w);
    let upper: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
    let sol = bounded_simplex(&at, h.as_slice(), b, &upper)?;
    let basic = DMatrix::from_fn(d, d, |r, c| a[(sol.basis[r], c)]);
    let rhs = DVector::from_fn(d, |r, _| b[sol.basis[r]]);
    let x = basic
        .lu()
        .solve(&rhs)
        .ok_or(Error::RankDeficient {
            condition: f64::INFINITY,
        })?;
    let r = residual(a, x.as_slice(), b);
    let objective = r.iter().zip(&w).map(|(ri, wi)| wi * ri.abs()).sum();
    Ok(OracleSolution {
        x: x.as_slice().to_vec(),
        objective,
    })
}

pub fn oracle_l1(f: &FactoredMatrix, b: &[f64], cap: usize) -> Result<OracleSolution> {
    check_len("oracle right-hand side", f.nrows(), b.len())?;
    let a = materialize(f, cap)?;
    dense_l1(&a, b, None)
}

/// `‖U₁‖_F²` where `[U₁; U₂]` is an orthonormal basis of the columns of
/// `[A; √λ·L]` and `U₁` has the rows of `A`.
pub fn oracle_stat_dim(a: &DMatrix<f64>, penalty: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    check_len("stat dim penalty columns", a.ncols(), penalty.ncols())?;
    let (n, d) = a.shape();
    let p = penalty.nrows();
    if n + p < d {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let mut stacked = DMatrix::zeros(n + p, d);
    stacked.rows_mut(0, n).copy_from(a);
    stacked
        .rows_mut(n, p)
        .copy_from(&(penalty * lambda.max(0.0).sqrt()));
    crate::linalg::qr_upper(stacked.clone())?;
    let q = stacked.qr().q();
    Ok(q.rows(0, n).norm_squared())
}

/// ℓ1 objective of `x` on the full factored problem.
pub fn l1_cost(f: &FactoredMatrix, x: &[f64], b: &[f64]) -> f64 {
    norm1(&residual(f, x, b))
}

/// ℓ2 objective of `x` on the full factored problem.
pub fn l2_cost(f: &FactoredMatrix, x: &[f64], b: &[f64]) -> f64 {
    norm2(&residual(f, x, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;
    use rand_distr::{Distribution, StandardNormal};

    fn randn(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    }

    fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
        let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        for (v, w) in pairs {
            acc += w;
            if acc >= total / 2.0 {
                return v;
            }
        }
        unreachable!()
    }

    #[test]
    fn materialize_small_cases() {
        let i2 = FactoredMatrix::new(vec![DMatrix::identity(2, 2); 2]).unwrap();
        assert_eq!(materialize(&i2, 100).unwrap(), DMatrix::identity(4, 4));
        let ones = FactoredMatrix::new(vec![DMatrix::from_element(2, 1, 1.0); 2]).unwrap();
        assert_eq!(materialize(&ones, 100).unwrap(), DMatrix::from_element(4, 1, 1.0));
        let f = FactoredMatrix::new(vec![randn(3, 2, 1), randn(4, 2, 2)]).unwrap();
        let dense = materialize(&f, 100).unwrap();
        for r in 1..=12 {
            let row = f.kron_row(r).unwrap();
            for c in 0..4 {
                assert_eq!(row[c], dense[(r - 1, c)]);
            }
        }
        assert!(matches!(
            materialize(&f, 47),
            Err(Error::OracleCapExceeded { requested: 48, cap: 47 })
        ));
    }

    #[test]
    fn consistent_systems_have_zero_optimum() {
        let f = FactoredMatrix::new(vec![randn(5, 2, 1), randn(4, 2, 2)]).unwrap();
        let b = f.kron_matvec(&[1.0, -1.0, 0.5, 2.0]).unwrap();
        assert!(oracle_l2(&f, &b, 1000).unwrap().objective < 1e-10);
        assert!(oracle_l1(&f, &b, 1000).unwrap().objective < 1e-10);
    }

    #[test]
    fn pspline_with_zero_lambda_is_l2() {
        let f = FactoredMatrix::new(vec![randn(6, 2, 3), randn(5, 2, 4)]).unwrap();
        let b = randn(30, 1, 5);
        let l = randn(3, 4, 6);
        let p = oracle_pspline(&f, &l, 0.0, b.as_slice(), 1000).unwrap();
        let o = oracle_l2(&f, b.as_slice(), 1000).unwrap();
        for (a, c) in p.x.iter().zip(&o.x) {
            assert!((a - c).abs() < 1e-10);
        }
        assert!((p.objective - o.objective * o.objective).abs() < 1e-10);
    }

    #[test]
    fn scalar_l1_is_weighted_median() {
        let mut rng = rng_from_seed(8);
        let a: Vec<f64> = (0..15).map(|_| 0.2 + rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..15).map(|_| StandardNormal.sample(&mut rng)).collect();
        let w: Vec<f64> = (0..15).map(|_| 0.5 + rng.random::<f64>()).collect();
        let sol = dense_l1(&DMatrix::from_column_slice(15, 1, &a), &b, Some(&w)).unwrap();
        // Σ w|a x − b| = Σ (w a)|x − b/a|
        let ratios: Vec<f64> = b.iter().zip(&a).map(|(bi, ai)| bi / ai).collect();
        let wa: Vec<f64> = w.iter().zip(&a).map(|(wi, ai)| wi * ai).collect();
        let xm = weighted_median(&ratios, &wa);
        let obj = |x: f64| -> f64 { (0..15).map(|i| w[i] * (a[i] * x - b[i]).abs()).sum() };
        assert!((sol.objective - obj(xm)).abs() < 1e-10);
    }

    #[test]
    fn l1_simplex_agrees_with_vertex_descent() {
        use crate::linalg::{solve_lad, LadOptions};
        for seed in 0..5 {
            let a = randn(60, 5, 40 + seed);
            let b = randn(60, 1, 50 + seed);
            let dense = dense_l1(&a, b.as_slice(), None).unwrap();
            let lad = solve_lad(&a, b.as_slice(), None, &LadOptions::default()).unwrap();
            assert!((dense.objective - lad.objective).abs() <= 1e-9 * dense.objective);
        }
    }

    #[test]
    fn stat_dim_endpoints() {
        let a = randn(20, 6, 9);
        let l = DMatrix::<f64>::identity(6, 6);
        assert!((oracle_stat_dim(&a, &l, 0.0).unwrap() - 6.0).abs() < 1e-10);
        assert!(oracle_stat_dim(&a, &l, 1e12).unwrap() < 1e-8);
    }

    #[test]
    fn sketch_matrix_has_one_entry_per_column() {
        let spec = TensorSketchSpec::new(&[3, 4], 5, 2).unwrap();
        let s = sketch_matrix(&spec, 1000).unwrap();
        for c in 0..12 {
            let nz = s.column(c).iter().filter(|v| **v != 0.0).count();
            assert_eq!(nz, 1);
        }
        assert!(sketch_matrix(&spec, 10).is_err());
    }
}
