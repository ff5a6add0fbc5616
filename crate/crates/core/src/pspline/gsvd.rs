//! Generalized singular values of a pair `(A, L)` by the pencil route.
//!
//! With `[A; L] = Q R` (or `AᵀA + LᵀL = RᵀR` when only the Gram matrix of
//! `A` is affordable), `Q_A = A R⁻¹` and `Q_L = L R⁻¹` satisfy
//! `Q_AᵀQ_A + Q_LᵀQ_L = I`. The eigenvectors `v` of `Q_LᵀQ_L` give
//! `σ² = ‖Q_A v‖²` and `μ² = ‖Q_L v‖²` with `σ² + μ² = 1`. Only the `p`
//! pairs with `μ > 0` are generalized values; `p = rank(L)`, which is less
//! than the row count of `L` for stacked tensor penalties.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // redundant once std is linked into the build
use num_traits::Float;

use crate::error::{check_len, Error, Result};
use crate::linalg::qr_upper;
use crate::tensor::FactoredMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct GsvdResult {
    /// Ascending, in `[0, 1)`.
    pub sigma: Vec<f64>,
    /// Descending, in `(0, 1]`.
    pub mu: Vec<f64>,
    /// `σ_i / μ_i`, ascending.
    pub gamma: Vec<f64>,
    /// `rank(L)`.
    pub p: usize,
    pub d: usize,
}

/// Numerical rank from singular values.
fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let tol = max * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON * 16.0;
    sv.iter().filter(|&&s| s > tol).count()
}

fn invert_upper(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    r.clone().try_inverse().ok_or(Error::RankDeficient {
        condition: f64::INFINITY,
    })
}

/// From `W_A = R⁻ᵀAᵀAR⁻¹` and `W_L = R⁻ᵀLᵀLR⁻¹`.
fn from_pencil(wa: DMatrix<f64>, wl: DMatrix<f64>, p: usize) -> GsvdResult {
    let d = wl.nrows();
    let sym = (&wl + wl.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..d)
        .map(|i| {
            let v = eig.eigenvectors.column(i);
            let s2 = (v.transpose() * &wa * v)[0].max(0.0);
            let m2 = (v.transpose() * &wl * v)[0].max(0.0);
            let total = s2 + m2;
            (s2 / total, m2 / total)
        })
        .collect();
    // keep the p largest μ²; those are the pairs with μ > 0
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1));
    pairs.truncate(p);
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let sigma: Vec<f64> = pairs.iter().map(|x| x.0.sqrt()).collect();
    let mu: Vec<f64> = pairs.iter().map(|x| x.1.sqrt()).collect();
    let gamma = sigma.iter().zip(&mu).map(|(s, m)| s / m).collect();
    GsvdResult { sigma, mu, gamma, p, d }
}

/// GSVD values of a dense pair. Needs `rank([A; L]) = d`.
pub fn gsvd_pair(a: &DMatrix<f64>, penalty: &DMatrix<f64>) -> Result<GsvdResult> {
    check_len("gsvd penalty columns", a.ncols(), penalty.ncols())?;
    let (n, d) = a.shape();
    let p_rows = penalty.nrows();
    let mut stacked = DMatrix::zeros(n + p_rows, d);
    stacked.rows_mut(0, n).copy_from(a);
    stacked.rows_mut(n, p_rows).copy_from(penalty);
    let r = qr_upper(stacked)?;
    let rinv = invert_upper(&r)?;
    let qa = a * &rinv;
    let ql = penalty * &rinv;
    let p = numerical_rank(penalty);
    Ok(from_pencil(qa.tr_mul(&qa), ql.tr_mul(&ql), p))
}

/// GSVD values of `(𝒜, L)` from the Kronecker Gram `𝒜ᵀ𝒜 = ⊗ A_kᵀA_k`; the
/// cost is independent of `n` beyond the factor Grams.
pub fn gsvd_factored(f: &FactoredMatrix, penalty: &DMatrix<f64>) -> Result<GsvdResult> {
    check_len("gsvd penalty columns", f.ncols(), penalty.ncols())?;
    let gram = f.gram();
    let ltl = penalty.tr_mul(penalty);
    let chol = (&gram + &ltl).cholesky().ok_or(Error::RankDeficient {
        condition: f64::INFINITY,
    })?;
    let r = chol.l().transpose();
    let rinv = invert_upper(&r)?;
    let wa = rinv.transpose() * &gram * &rinv;
    let wl = rinv.transpose() * &ltl * &rinv;
    let p = numerical_rank(penalty);
    Ok(from_pencil(wa, wl, p))
}

/// `Σ_{i≤p} γ_i²/(γ_i² + λ) + d − p`, written as `σ²/(σ² + λμ²)` so that
/// `γ_i = 0` contributes 0 for `λ > 0` and every term is 1 at `λ = 0`.
pub fn stat_dim(g: &GsvdResult, lambda: f64) -> f64 {
    let lambda = lambda.max(0.0);
    let mut sd = (g.d - g.p) as f64;
    for (s, m) in g.sigma.iter().zip(&g.mu) {
        let (s2, m2) = (s * s, m * m);
        sd += if lambda == 0.0 {
            1.0
        } else if s2 == 0.0 {
            0.0
        } else {
            s2 / (s2 + lambda * m2)
        };
    }
    sd
}

/// `Σ σ_i²/(σ_i² + λ)`.
pub fn ridge_stat_dim(singular_values: &[f64], lambda: f64) -> f64 {
    singular_values
        .iter()
        .map(|s| {
            let s2 = s * s;
            if lambda <= 0.0 {
                1.0
            } else if s2 == 0.0 {
                0.0
            } else {
                s2 / (s2 + lambda)
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_stat_dim;
    use crate::pspline::difference_matrix;
    use crate::rng::rng_from_seed;
    use alloc::vec;
    use rand_distr::{Distribution, StandardNormal};

    fn randn(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    }

    /// `γ²` as reciprocals of the nonzero eigenvalues of `G⁻¹LᵀLG⁻ᵀ` with
    /// `AᵀA = GGᵀ`.
    fn pencil_oracle(a: &DMatrix<f64>, l: &DMatrix<f64>) -> Vec<f64> {
        let g = (a.transpose() * a).cholesky().unwrap().l();
        let ginv = g.try_inverse().unwrap();
        let m = &ginv * l.transpose() * l * ginv.transpose();
        let m = (&m + m.transpose()) * 0.5;
        let mut ev: Vec<f64> = m
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .filter(|&k| k > 1e-10)
            .map(|k| 1.0 / k)
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    #[test]
    fn identity_penalty_gives_singular_values() {
        let a = randn(15, 5, 1);
        let g = gsvd_pair(&a, &DMatrix::identity(5, 5)).unwrap();
        let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| a.total_cmp(b));
        for (x, y) in g.gamma.iter().zip(&sv) {
            assert!((x - y).abs() < 1e-9 * (1.0 + y));
        }
    }

    #[test]
    fn zero_design_gives_zero_values() {
        let g = gsvd_pair(&DMatrix::zeros(10, 4), &DMatrix::identity(4, 4)).unwrap();
        assert!(g.sigma.iter().all(|&s| s == 0.0));
        assert!(g.gamma.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn matches_pencil_eigen_oracle() {
        let a = randn(20, 6, 2);
        let l = difference_matrix(6, 2).unwrap();
        let g = gsvd_pair(&a, &l).unwrap();
        assert_eq!(g.p, 4);
        let expect = pencil_oracle(&a, &l);
        assert_eq!(expect.len(), 4);
        for (x, y) in g.gamma.iter().zip(&expect) {
            assert!((x * x - y).abs() <= 1e-8 * (1.0 + y), "{} vs {}", x * x, y);
        }
        for (s, m) in g.sigma.iter().zip(&g.mu) {
            assert!((s * s + m * m - 1.0).abs() < 1e-8);
        }
        assert!(g.sigma.windows(2).all(|w| w[0] <= w[1]));
        assert!(g.mu.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn factored_route_matches_dense() {
        let f = FactoredMatrix::new(vec![randn(8, 3, 3), randn(7, 3, 4)]).unwrap();
        let l = crate::pspline::tensor_penalty(&[3, 3], 1).unwrap();
        let dense = crate::oracle::materialize(&f, usize::MAX).unwrap();
        let g1 = gsvd_pair(&dense, &l).unwrap();
        let g2 = gsvd_factored(&f, &l).unwrap();
        assert_eq!(g1.p, 8);
        assert_eq!(g2.p, 8);
        for (x, y) in g1.gamma.iter().zip(&g2.gamma) {
            assert!((x - y).abs() < 1e-8 * (1.0 + x));
        }
    }

    #[test]
    fn stat_dim_matches_orthonormal_oracle() {
        let a = randn(20, 6, 5);
        let l = difference_matrix(6, 2).unwrap();
        let g = gsvd_pair(&a, &l).unwrap();
        for lambda in [0.0, 0.5, 0.7, 3.0] {
            let sd = stat_dim(&g, lambda);
            let o = oracle_stat_dim(&a, &l, lambda).unwrap();
            assert!((sd - o).abs() < 1e-6, "lambda {lambda}: {sd} vs {o}");
        }
        assert_eq!(stat_dim(&g, 0.0), 6.0);
        assert!((stat_dim(&g, 1e300) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ridge_examples() {
        assert_eq!(ridge_stat_dim(&[1.0, 2.0, 3.0], 0.0), 3.0);
        assert!((ridge_stat_dim(&[1.0, 1.0], 1.0) - 1.0).abs() < 1e-15);
        assert!((ridge_stat_dim(&[2.0, 1.0], 2.0) - 1.0).abs() < 1e-15);
    }
}
