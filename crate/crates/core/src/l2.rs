//! Sketch-and-solve ℓ2 and nonnegative regression: form `S𝒜` and `Sb` with
//! one TensorSketch and solve the small `m × d` problem exactly.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // redundant once std is linked into the build
use num_traits::Float;

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{dense_lstsq, lstsq_owned, nnls, norm2, residual, LinearOperator, NnlsOptions};
use crate::sketch::{tensor_variance_factor, tensorsketch_apply_dense, tensorsketch_apply_factored, TensorSketchSpec};
use crate::tensor::FactoredMatrix;
use crate::DEFAULT_SKETCH_MEMORY_CAP;

#[derive(Debug, Clone)]
pub struct L2Options {
    pub eps: f64,
    pub delta: f64,
    /// Multiplier on the sketch size formula; 1 by default.
    pub size_constant: f64,
    /// Use this many sketch rows instead of the formula.
    pub m_override: Option<usize>,
    /// Cap on `m·(d + 1)` entries of the sketched system.
    pub memory_cap: usize,
    pub seed: u64,
}

impl Default for L2Options {
    fn default() -> Self {
        L2Options {
            eps: 0.5,
            delta: 0.1,
            size_constant: 1.0,
            m_override: None,
            memory_cap: DEFAULT_SKETCH_MEMORY_CAP,
            seed: 0,
        }
    }
}

/// `⌈c·(d + 1)²(2 + 3^q)/(ε²δ)⌉`.
pub fn l2_sketch_size(d: usize, q: usize, eps: f64, delta: f64, size_constant: f64) -> Result<usize> {
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    if !(size_constant > 0.0 && size_constant.is_finite()) {
        return Err(invalid("sketch size constant must be positive"));
    }
    let dp1 = d as f64 + 1.0;
    let m = (size_constant * dp1 * dp1 * tensor_variance_factor(q) / (eps * eps * delta)).ceil();
    if m >= usize::MAX as f64 {
        return Err(Error::Overflow);
    }
    Ok(m as usize)
}

pub(crate) fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(alloc::format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// `S𝒜` and `Sb`. When `m ≥ n` no compression is possible and the system is
/// the full problem (`S = I`).
#[derive(Debug, Clone)]
pub struct SketchedSystem {
    pub sa: DMatrix<f64>,
    pub sb: Vec<f64>,
    /// Sketch rows requested.
    pub m: usize,
    pub identity: bool,
}

pub fn sketch_system(f: &FactoredMatrix, b: &[f64], m: usize, seed: u64, memory_cap: usize) -> Result<SketchedSystem> {
    check_len("right-hand side", f.nrows(), b.len())?;
    if m == 0 {
        return Err(invalid("sketch dimension m must be positive"));
    }
    let rows = m.min(f.nrows());
    let requested = rows.checked_mul(f.ncols() + 1).ok_or(Error::Overflow)?;
    if requested > memory_cap {
        return Err(Error::SketchTooLarge {
            requested,
            cap: memory_cap,
        });
    }
    if m >= f.nrows() {
        let mut sa = DMatrix::zeros(f.nrows(), f.ncols());
        let mut row = vec![0.0; f.ncols()];
        for r in 0..f.nrows() {
            f.row(r, &mut row);
            for (c, v) in row.iter().enumerate() {
                sa[(r, c)] = *v;
            }
        }
        return Ok(SketchedSystem {
            sa,
            sb: b.to_vec(),
            m,
            identity: true,
        });
    }
    let spec = TensorSketchSpec::for_matrix(f, m, seed)?;
    Ok(SketchedSystem {
        sa: tensorsketch_apply_factored(&spec, f)?,
        sb: tensorsketch_apply_dense(&spec, b)?,
        m,
        identity: false,
    })
}

#[derive(Debug, Clone)]
pub struct L2Solution {
    pub x: Vec<f64>,
    /// Sketch rows used.
    pub m: usize,
    /// True when `m ≥ n` and the full problem was solved.
    pub identity: bool,
    /// `‖S𝒜x − Sb‖₂`.
    pub sketched_residual: f64,
}

fn resolve_m(f: &FactoredMatrix, opts: &L2Options) -> Result<usize> {
    match opts.m_override {
        Some(0) => Err(invalid("sketch dimension m must be positive")),
        Some(m) => Ok(m),
        None => l2_sketch_size(f.ncols(), f.q(), opts.eps, opts.delta, opts.size_constant),
    }
}

/// Approximately `argmin ‖𝒜x − b‖₂`.
pub fn sketched_kron_lstsq(f: &FactoredMatrix, b: &[f64], opts: &L2Options) -> Result<L2Solution> {
    let m = resolve_m(f, opts)?;
    let sys = sketch_system(f, b, m, opts.seed, opts.memory_cap)?;
    let x = lstsq_owned(sys.sa.clone(), &sys.sb)?;
    finish(sys, x)
}

/// Approximately `argmin_{x ≥ 0} ‖𝒜x − b‖₂`.
pub fn sketched_kron_nnls(f: &FactoredMatrix, b: &[f64], opts: &L2Options) -> Result<L2Solution> {
    let m = resolve_m(f, opts)?;
    let sys = sketch_system(f, b, m, opts.seed, opts.memory_cap)?;
    let x = nnls(&sys.sa, &sys.sb, NnlsOptions::default())?;
    finish(sys, x)
}

fn finish(sys: SketchedSystem, x: Vec<f64>) -> Result<L2Solution> {
    let sketched_residual = norm2(&residual(&sys.sa, &x, &sys.sb));
    Ok(L2Solution {
        x,
        m: sys.m,
        identity: sys.identity,
        sketched_residual,
    })
}

/// Plain least squares on an already sketched system.
pub fn solve_sketched(sys: &SketchedSystem) -> Result<Vec<f64>> {
    dense_lstsq(&sys.sa, &sys.sb)
}
