//! Sampling-based ℓ1 regression over a Kronecker design.
//!
//! The pipeline: a block sketch gives a well-conditioned basis `𝒜U`; a
//! Gaussian `G` compresses it to `O(log n)` columns; Cauchy medians estimate
//! the ℓ1 mass of each column of `𝒜UG` and of each column of its reshape;
//! rows are then drawn in three levels and the small weighted ℓ1 problem is
//! solved exactly.

mod condition;
mod estimate;
mod sample;

pub use condition::{condition, condition_p, gamma_p, WellConditionedBasis};
pub use estimate::{choose_split, default_cauchy_rows, estimate_columns, reshape_column, ColumnEstimates};
pub use sample::{exact_row_distribution, sample_rows, sample_rows_with, SampleProbability, SampledL1Problem};

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // redundant once std is linked into the build
use num_traits::Float;

use crate::error::{check_len, invalid, Error, Result};
use crate::l2::check_unit;
use crate::linalg::{solve_lad, LadOptions, LinearOperator};
use crate::rng::derive_seed;
use crate::sketch::{tensor_variance_factor, DenseSketch};
use crate::tensor::FactoredMatrix;

/// Exact optimum of the reduced problem `min Σ_i w_i |a_{r_i}ᵀx − b_{r_i}|`.
#[derive(Debug, Clone)]
pub struct SampledSolution {
    pub x: Vec<f64>,
    /// Weighted ℓ1 objective of the reduced problem.
    pub objective: f64,
    /// Relative LP duality gap of the certificate.
    pub relative_gap: f64,
    pub unique_rows: usize,
}

/// Solves the sampled problem exactly; duplicate draws are merged by
/// summing their weights, which leaves the objective unchanged.
pub fn solve_sampled_l1(f: &FactoredMatrix, b: &[f64], prob: &SampledL1Problem) -> Result<SampledSolution> {
    check_len("right-hand side", f.nrows(), b.len())?;
    check_len("sample weights", prob.rows.len(), prob.weights.len())?;
    let opts = LadOptions::default();
    if prob.full && prob.rows.len() == f.nrows() && prob.weights.iter().all(|&w| w == 1.0) {
        let sol = solve_lad(f, b, None, &opts)?;
        return Ok(SampledSolution {
            x: sol.x,
            objective: sol.objective,
            relative_gap: sol.relative_gap,
            unique_rows: f.nrows(),
        });
    }
    let (rows, weights) = prob.merged();
    if let Some(&r) = rows.last() {
        if r >= f.nrows() {
            return Err(Error::IndexOutOfRange {
                context: "sampled row",
                index: r + 1,
                bound: f.nrows(),
            });
        }
    }
    let d = f.ncols();
    if rows.len() < d {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    let mut a = DMatrix::zeros(rows.len(), d);
    let mut buf = vec![0.0; d];
    for (i, &r) in rows.iter().enumerate() {
        f.row(r, &mut buf);
        for (c, v) in buf.iter().enumerate() {
            a[(i, c)] = *v;
        }
    }
    let bs: Vec<f64> = rows.iter().map(|&r| b[r]).collect();
    let sol = solve_lad(&a, &bs, Some(&weights), &opts)?;
    Ok(SampledSolution {
        x: sol.x,
        objective: sol.objective,
        relative_gap: sol.relative_gap,
        unique_rows: rows.len(),
    })
}

#[derive(Debug, Clone)]
pub struct L1Options {
    pub eps: f64,
    pub delta: f64,
    /// Block heights `w_k`; defaults to the divisor of `n_k` nearest `√n_k`.
    pub heights: Option<Vec<usize>>,
    /// Rows per block `m_b`; defaults to `min(⌈100 d²(2 + 3^q)/ε²⌉, ∏ w_k)`.
    pub rows_per_block: Option<usize>,
    /// Boosting count `t` (odd); defaults to the odd number nearest
    /// `ln(1/δ)`, at least 1.
    pub boost: Option<usize>,
    /// Sample count `N`; defaults to `⌈c_N·√(∏ w_k)·d^a⌉`.
    pub n_samples: Option<usize>,
    pub sample_constant: f64,
    pub sample_exponent: f64,
    /// Gaussian columns; defaults to `⌈4 ln n⌉`.
    pub gaussian_cols: Option<usize>,
    /// Cauchy rows; defaults to `⌈9 ln n⌉` made odd.
    pub cauchy_rows: Option<usize>,
    /// Weight draws by `1/(N·π)`; otherwise every draw has weight 1.
    pub reweight: bool,
    /// The `π` used for the weights.
    pub probability: SampleProbability,
    pub seed: u64,
}

impl Default for L1Options {
    fn default() -> Self {
        L1Options {
            eps: 0.5,
            delta: 0.1,
            heights: None,
            rows_per_block: None,
            boost: None,
            n_samples: None,
            sample_constant: 10.0,
            sample_exponent: 2.0,
            gaussian_cols: None,
            cauchy_rows: None,
            reweight: true,
            probability: SampleProbability::Path,
            seed: 0,
        }
    }
}

/// Divisor of `n` closest to `√n` (the smaller one on ties).
pub fn default_block_height(n: usize) -> usize {
    let root = (n as f64).sqrt();
    (1..=n)
        .filter(|w| n.is_multiple_of(*w))
        .min_by(|&a, &b| (a as f64 - root).abs().total_cmp(&(b as f64 - root).abs()))
        .unwrap_or(1)
}

pub fn default_boost(delta: f64) -> usize {
    let t = (1.0 / delta).ln().round().max(1.0) as usize;
    if t.is_multiple_of(2) {
        t + 1
    } else {
        t
    }
}

/// `⌈c_N·√w·d^a⌉`.
pub fn default_sample_count(block_size: usize, d: usize, constant: f64, exponent: f64) -> usize {
    (constant * (block_size as f64).sqrt() * (d as f64).powf(exponent)).ceil() as usize
}

#[derive(Debug, Clone)]
pub struct L1Solution {
    pub x: Vec<f64>,
    pub basis: WellConditionedBasis,
    pub n_samples: usize,
    pub unique_rows: usize,
    /// Every row was used once with unit weight.
    pub full: bool,
    pub sampled_objective: f64,
    pub relative_gap: f64,
}

/// The full pipeline. When the sample count reaches `n` the reduced problem
/// is the whole problem, solved exactly.
pub fn l1_tensor_regression(f: &FactoredMatrix, b: &[f64], opts: &L1Options) -> Result<L1Solution> {
    check_len("right-hand side", f.nrows(), b.len())?;
    check_unit("eps", opts.eps)?;
    check_unit("delta", opts.delta)?;
    let (n, d, q) = (f.nrows(), f.ncols(), f.q());
    let heights = match &opts.heights {
        Some(h) => h.clone(),
        None => f.row_dims().iter().map(|&nk| default_block_height(nk)).collect(),
    };
    check_len("block heights", q, heights.len())?;
    let block_size: usize = heights.iter().product();
    let m_b = match opts.rows_per_block {
        Some(0) => return Err(invalid("rows per block must be positive")),
        Some(m) => m,
        None => {
            let formula = (100.0 * (d * d) as f64 * tensor_variance_factor(q) / (opts.eps * opts.eps)).ceil();
            if formula >= block_size as f64 {
                block_size
            } else {
                formula as usize
            }
        }
    };
    let boost = opts.boost.unwrap_or_else(|| default_boost(opts.delta));
    let basis = condition(f, &heights, m_b, boost, derive_seed(opts.seed, 1))?;

    let n_samples = opts
        .n_samples
        .unwrap_or_else(|| default_sample_count(block_size, d, opts.sample_constant, opts.sample_exponent));
    if n_samples == 0 {
        return Err(invalid("sample count must be positive"));
    }
    let prob = if n_samples >= n {
        SampledL1Problem::full(n)
    } else {
        let ln_n = (n.max(2) as f64).ln();
        let c_g = opts.gaussian_cols.unwrap_or((4.0 * ln_n).ceil() as usize).max(1);
        let c_r = opts.cauchy_rows.unwrap_or_else(|| default_cauchy_rows(n));
        let g = DenseSketch::gaussian(d, c_g, derive_seed(opts.seed, 2)).materialize();
        let ug = &basis.u * g;
        let q1 = choose_split(f);
        let n_left: usize = f.row_dims()[..q1].iter().product();
        let est = estimate_columns(f, &ug, q1, &DenseSketch::cauchy(c_r, n_left, derive_seed(opts.seed, 3)))?;
        sample_rows_with(
            f,
            &ug,
            &est,
            n_samples,
            sample::sampling_seed(opts.seed),
            opts.reweight,
            opts.probability,
        )?
    };
    let sol = solve_sampled_l1(f, b, &prob)?;
    Ok(L1Solution {
        x: sol.x,
        basis,
        n_samples,
        unique_rows: sol.unique_rows,
        full: prob.full,
        sampled_objective: sol.objective,
        relative_gap: sol.relative_gap,
    })
}

/// Runs the pipeline `repeats` times with independent seeds and keeps the
/// solution with the smallest full ℓ1 cost. Each cost evaluation is one
/// `O(n·d)` pass over the factored matrix.
pub fn l1_tensor_regression_best_of(
    f: &FactoredMatrix,
    b: &[f64],
    opts: &L1Options,
    repeats: usize,
) -> Result<(L1Solution, f64)> {
    if repeats == 0 {
        return Err(invalid("repeat count must be positive"));
    }
    let mut best: Option<(L1Solution, f64)> = None;
    for r in 0..repeats {
        let run = L1Options {
            seed: if repeats == 1 { opts.seed } else { derive_seed(opts.seed, 1000 + r as u64) },
            ..opts.clone()
        };
        let sol = l1_tensor_regression(f, b, &run)?;
        let cost = crate::linalg::norm1(&crate::linalg::residual(f, &sol.x, b));
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((sol, cost));
        }
    }
    Ok(best.expect("at least one repeat"))
}
