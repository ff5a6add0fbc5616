use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // redundant once std is linked into the build
use num_traits::Float;

use super::gsvd::{gsvd_factored, stat_dim};
use super::penalty::PenaltySpec;
use crate::error::{check_len, invalid, Error, Result};
use crate::l2::{check_unit, sketch_system};
use crate::linalg::{norm2, residual, stacked_lstsq};
use crate::oracle::materialize;
use crate::tensor::FactoredMatrix;
use crate::DEFAULT_SKETCH_MEMORY_CAP;

/// `argmin ‖Ax − b‖² + λ‖Lx‖²` as the stacked problem `[A; √λL] x ≈ [b; 0]`.
pub fn penalized_lstsq(a: &DMatrix<f64>, penalty: &PenaltySpec, b: &[f64]) -> Result<Vec<f64>> {
    stacked_lstsq(a, &penalty.matrix, penalty.lambda.sqrt(), b)
}

/// Dense penalized solve on a factored design, materialized within `cap`
/// entries.
pub fn penalized_lstsq_factored(f: &FactoredMatrix, penalty: &PenaltySpec, b: &[f64], cap: usize) -> Result<Vec<f64>> {
    let a = materialize(f, cap)?;
    penalized_lstsq(&a, penalty, b)
}

/// `‖Ax − b‖² + λ‖Lx‖²` for any design.
pub fn penalized_objective<O: crate::linalg::LinearOperator + ?Sized>(
    a: &O,
    penalty: &PenaltySpec,
    x: &[f64],
    b: &[f64],
) -> f64 {
    let fit = norm2(&residual(a, x, b));
    let lx = &penalty.matrix * nalgebra::DVector::from_column_slice(x);
    fit * fit + penalty.lambda * lx.norm_squared()
}

/// `⌈K(sd/ε + sd²)⌉`.
pub fn pspline_sketch_size(stat_dim: f64, eps: f64, k_const: f64) -> Result<usize> {
    check_unit("eps", eps)?;
    if !(k_const > 0.0 && k_const.is_finite()) {
        return Err(invalid("sketch size constant K must be positive"));
    }
    if !(stat_dim >= 0.0) {
        return Err(invalid("statistical dimension must be nonnegative"));
    }
    let m = (k_const * (stat_dim / eps + stat_dim * stat_dim)).ceil().max(1.0);
    if m >= usize::MAX as f64 {
        return Err(Error::Overflow);
    }
    Ok(m as usize)
}

#[derive(Debug, Clone)]
pub struct PsplineOptions {
    pub eps: f64,
    /// The `K` in `m = K(sd/ε + sd²)`.
    pub size_constant: f64,
    pub m_override: Option<usize>,
    /// Skip the GSVD and use this statistical dimension.
    pub stat_dim: Option<f64>,
    pub memory_cap: usize,
    pub seed: u64,
}

impl Default for PsplineOptions {
    fn default() -> Self {
        PsplineOptions {
            eps: 0.5,
            size_constant: 1.0,
            m_override: None,
            stat_dim: None,
            memory_cap: DEFAULT_SKETCH_MEMORY_CAP,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PsplineSolution {
    pub x: Vec<f64>,
    pub m: usize,
    pub identity: bool,
    /// `sd_λ(𝒜, L)` when supplied or computed to size the sketch; `None`
    /// with an explicit `m`.
    pub stat_dim: Option<f64>,
    /// `‖S(𝒜x − b)‖² + λ‖Lx‖²`.
    pub sketched_objective: f64,
    /// Set when `λ` exceeds `γ²_min/ε` for the smallest nonzero generalized
    /// value, outside the regime the accuracy guarantee covers.
    pub warning: Option<String>,
}

/// Sketches only the data-fit term: `argmin ‖S(𝒜x − b)‖² + λ‖Lx‖²`.
pub fn sketched_pspline(f: &FactoredMatrix, penalty: &PenaltySpec, b: &[f64], opts: &PsplineOptions) -> Result<PsplineSolution> {
    check_len("penalty columns", f.ncols(), penalty.matrix.ncols())?;
    check_len("right-hand side", f.nrows(), b.len())?;
    check_unit("eps", opts.eps)?;
    // the GSVD is only needed to size the sketch
    let needs_gsvd = opts.stat_dim.is_none() && opts.m_override.is_none();
    let mut warning = None;
    let mut sd = opts.stat_dim;
    if needs_gsvd {
        let g = gsvd_factored(f, &penalty.matrix)?;
        sd = Some(stat_dim(&g, penalty.lambda));
        if let Some(&gmin) = g.gamma.iter().find(|&&v| v > 0.0) {
            let bound = gmin * gmin / opts.eps;
            if penalty.lambda > bound {
                warning = Some(alloc::format!(
                    "lambda = {} exceeds gamma_min^2 / eps = {:.3e}; the (1 + eps) guarantee does not cover this regime",
                    penalty.lambda, bound
                ));
            }
        }
    }
    let m = match opts.m_override {
        Some(0) => return Err(invalid("sketch dimension m must be positive")),
        Some(m) => m,
        None => pspline_sketch_size(sd.unwrap_or(f.ncols() as f64), opts.eps, opts.size_constant)?,
    };
    let sys = sketch_system(f, b, m, opts.seed, opts.memory_cap)?;
    let x = stacked_lstsq(&sys.sa, &penalty.matrix, penalty.lambda.sqrt(), &sys.sb)?;
    let sketched_objective = penalized_objective(&sys.sa, penalty, &x, &sys.sb);
    Ok(PsplineSolution {
        x,
        m,
        identity: sys.identity,
        stat_dim: sd,
        sketched_objective,
        warning,
    })
}
