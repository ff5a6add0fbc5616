//! Three-level row sampling: a sketched column `e` with probability
//! `∝ λ_e`, a reshaped column `j` with probability `∝ λ_j`, then an entry `k`
//! of the exact column `M_{·j}` with probability `∝ |M_{kj}|`. Row
//! `(k, j)` of `L ⊗ R` has zero-based index `k·n_R + j`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng as _;

use super::estimate::{reshape_column0, sides, ColumnEstimates};
use crate::error::{check_len, invalid, Error, Result};
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::tensor::FactoredMatrix;

/// The rows kept for the reduced ℓ1 problem, with replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledL1Problem {
    /// Zero-based row indices, one per draw.
    pub rows: Vec<usize>,
    /// Probability of each draw: the realized path, or the row's marginal
    /// (see [`SampleProbability`]).
    pub probabilities: Vec<f64>,
    /// Weight of each draw in the reduced objective.
    pub weights: Vec<f64>,
    /// True when every row of `𝒜` is kept once with unit weight.
    pub full: bool,
}

impl SampledL1Problem {
    /// All `n` rows, weight 1.
    pub fn full(n: usize) -> Self {
        SampledL1Problem {
            rows: (0..n).collect(),
            probabilities: vec![1.0 / n as f64; n],
            weights: vec![1.0; n],
            full: true,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct rows with summed weights, sorted by row.
    pub fn merged(&self) -> (Vec<usize>, Vec<f64>) {
        let mut pairs: Vec<(usize, f64)> = self.rows.iter().copied().zip(self.weights.iter().copied()).collect();
        pairs.sort_by_key(|p| p.0);
        let mut rows: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (r, w) in pairs {
            if rows.last() == Some(&r) {
                *weights.last_mut().unwrap() += w;
            } else {
                rows.push(r);
                weights.push(w);
            }
        }
        (rows, weights)
    }
}

/// Which probability a draw's weight `1/(N·π)` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleProbability {
    /// Probability of the `(e, j, k)` path that produced the draw.
    #[default]
    Path,
    /// Marginal probability of the row, summed over every sketched column
    /// `e`. Costs `O(d·c_G)` per draw plus one reshaped column norm per
    /// distinct `(e, j)`.
    Marginal,
}

/// Index drawn with probability `weights[i] / Σ weights`.
fn draw(rng: &mut Rng, weights: &[f64], total: f64) -> Option<usize> {
    if !(total > 0.0) {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    last
}

/// `n_samples` i.i.d. draws. Draw `i` uses the RNG seeded with
/// `seed + i`. With `reweight` each draw carries `1/(N·π)`, otherwise 1.
pub fn sample_rows(
    f: &FactoredMatrix,
    ug: &DMatrix<f64>,
    est: &ColumnEstimates,
    n_samples: usize,
    seed: u64,
    reweight: bool,
) -> Result<SampledL1Problem> {
    sample_rows_with(f, ug, est, n_samples, seed, reweight, SampleProbability::Path)
}

/// [`sample_rows`] with a choice of recorded probability. The draws
/// themselves do not depend on `mode`.
pub fn sample_rows_with(
    f: &FactoredMatrix,
    ug: &DMatrix<f64>,
    est: &ColumnEstimates,
    n_samples: usize,
    seed: u64,
    reweight: bool,
    mode: SampleProbability,
) -> Result<SampledL1Problem> {
    check_len("sketched basis rows", f.ncols(), ug.nrows())?;
    check_len("estimate columns", ug.ncols(), est.totals.len())?;
    if n_samples == 0 {
        return Err(invalid("sample count must be positive"));
    }
    let grand = est.grand_total();
    if !(grand > 0.0) {
        return Err(Error::Degenerate("all column estimates are zero".into()));
    }
    let (left, right) = sides(f, est.q1)?;
    let nr = right.nrows();
    let mut rows = Vec::with_capacity(n_samples);
    let mut probabilities = Vec::with_capacity(n_samples);
    let mut cached: Option<(usize, usize, Vec<f64>, f64)> = None;
    for i in 0..n_samples {
        let mut rng = rng_from_seed(seed.wrapping_add(i as u64));
        let e = draw(&mut rng, &est.totals, grand).expect("positive total");
        let lam = &est.per_column[e];
        let j = draw(&mut rng, lam, est.totals[e]).ok_or_else(|| Error::Degenerate("empty column estimate".into()))?;
        let reuse = matches!(&cached, Some((ce, cj, _, _)) if *ce == e && *cj == j);
        if !reuse {
            let ecol: Vec<f64> = ug.column(e).iter().copied().collect();
            let col = reshape_column0(&left, &right, &ecol, j);
            let abs: Vec<f64> = col.iter().map(|v| v.abs()).collect();
            let norm: f64 = abs.iter().sum();
            cached = Some((e, j, abs, norm));
        }
        let (_, _, abs, norm) = cached.as_ref().unwrap();
        let k = draw(&mut rng, abs, *norm).ok_or_else(|| {
            Error::Degenerate("sampled a reshaped column whose entries are all zero".into())
        })?;
        let pi = (est.totals[e] / grand) * (lam[j] / est.totals[e]) * (abs[k] / norm);
        rows.push(k * nr + j);
        probabilities.push(pi);
    }
    if mode == SampleProbability::Marginal {
        probabilities = marginal_probabilities(f, ug, est, &left, &right, &rows);
    }
    let weights = if reweight {
        probabilities.iter().map(|p| 1.0 / (n_samples as f64 * p)).collect()
    } else {
        vec![1.0; n_samples]
    };
    Ok(SampledL1Problem {
        rows,
        probabilities,
        weights,
        full: false,
    })
}

fn marginal_probabilities(
    f: &FactoredMatrix,
    ug: &DMatrix<f64>,
    est: &ColumnEstimates,
    left: &FactoredMatrix,
    right: &FactoredMatrix,
    rows: &[usize],
) -> Vec<f64> {
    let grand = est.grand_total();
    let nr = right.nrows();
    let cols: Vec<Vec<f64>> = (0..ug.ncols()).map(|e| ug.column(e).iter().copied().collect()).collect();
    // ‖M^e_{·j}‖₁ per column j, filled on first use
    let mut norms: Vec<Option<Vec<f64>>> = vec![None; nr];
    let mut row = vec![0.0; f.ncols()];
    rows.iter()
        .map(|&r| {
            let j = r % nr;
            let nj = norms[j].get_or_insert_with(|| {
                cols.iter()
                    .map(|e| reshape_column0(left, right, e, j).iter().map(|v| v.abs()).sum())
                    .collect()
            });
            crate::linalg::LinearOperator::row(f, r, &mut row);
            (0..ug.ncols())
                .filter(|&e| nj[e] > 0.0)
                .map(|e| {
                    let entry: f64 = row.iter().zip(cols[e].iter()).map(|(a, u)| a * u).sum();
                    (est.per_column[e][j] / grand) * (entry.abs() / nj[e])
                })
                .sum()
        })
        .collect()
}

/// Exact marginal law of one draw, by enumerating every path. Needs the
/// full `n`-vector per sketched column; for tests and diagnostics only.
pub fn exact_row_distribution(f: &FactoredMatrix, ug: &DMatrix<f64>, est: &ColumnEstimates) -> Result<Vec<f64>> {
    let grand = est.grand_total();
    if !(grand > 0.0) {
        return Err(Error::Degenerate("all column estimates are zero".into()));
    }
    let (left, right) = sides(f, est.q1)?;
    let nr = right.nrows();
    let mut pi = vec![0.0; f.nrows()];
    for e in 0..ug.ncols() {
        let ecol: Vec<f64> = ug.column(e).iter().copied().collect();
        for j in 0..nr {
            let lj = est.per_column[e][j];
            if lj == 0.0 {
                continue;
            }
            let col = reshape_column0(&left, &right, &ecol, j);
            let norm: f64 = col.iter().map(|v| v.abs()).sum();
            if norm == 0.0 {
                continue;
            }
            for (k, v) in col.iter().enumerate() {
                pi[k * nr + j] += (lj / grand) * (v.abs() / norm);
            }
        }
    }
    Ok(pi)
}

/// Seed for the sampling stage of a pipeline run.
pub(crate) fn sampling_seed(master: u64) -> u64 {
    derive_seed(master, 4)
}
