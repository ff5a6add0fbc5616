//! Block-diagonal sketches. Factor `k` is cut into `n_k / w_k` row blocks of
//! height `w_k`; every combination of blocks is a sub-Kronecker product with
//! its own independently seeded (and boosted) TensorSketch.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::tensorsketch::{tensorsketch_apply_factored, TensorSketchSpec};
use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{median, LinearOperator};
use crate::rng::derive_seed;
use crate::tensor::FactoredMatrix;

/// What is applied to one row block.
#[derive(Debug, Clone)]
pub enum BlockOperator {
    /// Used when the requested sketch size is at least the block height;
    /// the block passes through unchanged.
    Identity,
    Sketch(TensorSketchSpec),
}

#[derive(Debug, Clone)]
pub struct BlockSketchSpec {
    heights: Vec<usize>,
    counts: Vec<usize>,
    requested_rows: usize,
    rows_per_block: usize,
    boost: usize,
    blocks: Vec<BlockOperator>,
}

impl BlockSketchSpec {
    /// Block heights `w_k`.
    pub fn heights(&self) -> &[usize] {
        &self.heights
    }

    /// Blocks per factor, `n_k / w_k`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// The `m_b` that was asked for.
    pub fn requested_rows(&self) -> usize {
        self.requested_rows
    }

    /// Output rows per block: `min(m_b, ∏ w_k)`.
    pub fn rows_per_block(&self) -> usize {
        self.rows_per_block
    }

    pub fn boost(&self) -> usize {
        self.boost
    }

    pub fn blocks(&self) -> &[BlockOperator] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn output_rows(&self) -> usize {
        self.rows_per_block * self.blocks.len()
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.iter().all(|b| matches!(b, BlockOperator::Identity))
    }

    /// Builds the spec for `f` and returns it with `S𝒜`, which boosting has
    /// to compute anyway.
    pub fn build(
        f: &FactoredMatrix,
        heights: &[usize],
        m_b: usize,
        boost: usize,
        seed: u64,
    ) -> Result<(Self, DMatrix<f64>)> {
        check_len("block heights", f.q(), heights.len())?;
        if m_b == 0 {
            return Err(invalid("rows per block must be positive"));
        }
        check_boost(boost)?;
        let mut counts = Vec::with_capacity(f.q());
        for (k, (&w, &n)) in heights.iter().zip(f.row_dims()).enumerate() {
            if w == 0 || n % w != 0 {
                return Err(Error::BlockDivisibility {
                    factor: k + 1,
                    block: w,
                    rows: n,
                });
            }
            counts.push(n / w);
        }
        let block_height: usize = heights.iter().product();
        let rows_per_block = m_b.min(block_height);
        let num_blocks: usize = counts.iter().product();
        let d = f.ncols();
        let mut out = DMatrix::zeros(rows_per_block * num_blocks, d);
        let mut blocks = Vec::with_capacity(num_blocks);
        let mut idx = vec![0usize; f.q()];
        for b in 0..num_blocks {
            let sub = f.row_block(&idx, heights)?;
            let (op, sketched) = if m_b >= block_height {
                (BlockOperator::Identity, dense_rows(&sub))
            } else {
                let (spec, sa) = boost_candidates(&sub, m_b, boost, derive_seed(seed, b as u64))?;
                (BlockOperator::Sketch(spec), sa)
            };
            out.rows_mut(b * rows_per_block, rows_per_block).copy_from(&sketched);
            blocks.push(op);
            advance(&mut idx, &counts);
        }
        Ok((
            BlockSketchSpec {
                heights: heights.to_vec(),
                counts,
                requested_rows: m_b,
                rows_per_block,
                boost,
                blocks,
            },
            out,
        ))
    }
}

fn check_boost(t: usize) -> Result<()> {
    if t == 0 || t.is_multiple_of(2) {
        Err(invalid(alloc::format!("boosting count t = {t} must be odd and positive")))
    } else {
        Ok(())
    }
}

fn advance(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

fn dense_rows(f: &FactoredMatrix) -> DMatrix<f64> {
    let (n, d) = (f.nrows(), f.ncols());
    let mut out = DMatrix::zeros(n, d);
    let mut row = vec![0.0; d];
    for r in 0..n {
        f.row(r, &mut row);
        for (c, v) in row.iter().enumerate() {
            out[(r, c)] = *v;
        }
    }
    out
}

/// Index minimizing the median Frobenius distance from its Gram matrix to
/// the others; ties go to the lowest index.
pub(crate) fn select_by_median(grams: &[DMatrix<f64>]) -> usize {
    let t = grams.len();
    if t <= 1 {
        return 0;
    }
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for j in 0..t {
        let dists: Vec<f64> = (0..t)
            .filter(|&i| i != j)
            .map(|i| (&grams[j] - &grams[i]).norm())
            .collect();
        let score = median(&dists);
        if score < best_score {
            best_score = score;
            best = j;
        }
    }
    best
}

fn boost_candidates(
    block: &FactoredMatrix,
    m_b: usize,
    t: usize,
    seed: u64,
) -> Result<(TensorSketchSpec, DMatrix<f64>)> {
    let mut specs = Vec::with_capacity(t);
    let mut sketches = Vec::with_capacity(t);
    for j in 0..t {
        let spec = TensorSketchSpec::for_matrix(block, m_b, derive_seed(seed, j as u64))?;
        sketches.push(tensorsketch_apply_factored(&spec, block)?);
        specs.push(spec);
    }
    let pick = if t == 1 {
        0
    } else {
        let grams: Vec<DMatrix<f64>> = sketches.iter().map(|s| s.tr_mul(s)).collect();
        select_by_median(&grams)
    };
    Ok((specs.swap_remove(pick), sketches.swap_remove(pick)))
}

/// Picks one of `t` independent TensorSketches for `block` by median
/// cross-validation of their Gram matrices. `t` must be odd.
pub fn boosted_block_sketch(block: &FactoredMatrix, m_b: usize, t: usize, seed: u64) -> Result<TensorSketchSpec> {
    check_boost(t)?;
    Ok(boost_candidates(block, m_b, t, seed)?.0)
}

/// Applies every block operator to its row block of `f` and stacks the
/// results in lexicographic block order.
pub fn block_sketch_apply(spec: &BlockSketchSpec, f: &FactoredMatrix) -> Result<DMatrix<f64>> {
    check_len("block sketch factor count", spec.heights.len(), f.q())?;
    for (k, (&w, &n)) in spec.heights.iter().zip(f.row_dims()).enumerate() {
        if n != w * spec.counts[k] {
            return Err(Error::BlockDivisibility {
                factor: k + 1,
                block: w,
                rows: n,
            });
        }
    }
    let mut out = DMatrix::zeros(spec.output_rows(), f.ncols());
    let mut idx = vec![0usize; f.q()];
    for (b, op) in spec.blocks.iter().enumerate() {
        let sub = f.row_block(&idx, &spec.heights)?;
        let sketched = match op {
            BlockOperator::Identity => dense_rows(&sub),
            BlockOperator::Sketch(s) => tensorsketch_apply_factored(s, &sub)?,
        };
        out.rows_mut(b * spec.rows_per_block, spec.rows_per_block)
            .copy_from(&sketched);
        advance(&mut idx, &spec.counts);
    }
    Ok(out)
}
