use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // redundant once std is linked into the build
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::linalg::qr_upper;
use crate::rng::derive_seed;
use crate::sketch::BlockSketchSpec;
use crate::tensor::FactoredMatrix;

/// `√2·t^{1/p − 1/2}` for `p ≤ 2`, `√2·w^{1/2 − 1/p}` for `p ≥ 2`.
pub fn gamma_p(p: f64, t: usize, w: usize) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(alloc::format!("norm index p = {p} must be finite and at least 1")));
    }
    if t == 0 || w == 0 {
        return Err(invalid("gamma_p needs t, w >= 1"));
    }
    let root2 = core::f64::consts::SQRT_2;
    Ok(if p <= 2.0 {
        root2 * (t as f64).powf(1.0 / p - 0.5)
    } else {
        root2 * (w as f64).powf(0.5 - 1.0 / p)
    })
}

/// A change of basis `U` such that `𝒜U / scale` is well conditioned in ℓp.
#[derive(Debug, Clone)]
pub struct WellConditionedBasis {
    /// `R⁻¹` from the QR of the block-sketched design.
    pub u: DMatrix<f64>,
    /// `d·γ_p`.
    pub scale: f64,
    pub p: f64,
    /// Reported `(α, β)` of `S𝒜U` in ℓ2: `(√d, 1)`.
    pub alpha: f64,
    pub beta: f64,
    pub heights: Vec<usize>,
    /// Rows per block actually produced, `min(m_b, ∏ w_k)`.
    pub rows_per_block: usize,
    pub boost: usize,
    /// Every block passed through unsketched.
    pub identity: bool,
    /// The first sketch was rank deficient and a second one was drawn.
    pub resampled: bool,
}

impl WellConditionedBasis {
    /// `∏ w_k`.
    pub fn block_size(&self) -> usize {
        self.heights.iter().product()
    }

    /// Bound `β√3·d·(t·w)^{|1/p − 1/2|}` on `‖x‖_q` against `‖(𝒜U/scale)x‖_p`.
    pub fn beta_bound(&self) -> f64 {
        let d = self.u.nrows() as f64;
        let tw = (self.rows_per_block * self.block_size()) as f64;
        self.beta * 3f64.sqrt() * d * tw.powf((1.0 / self.p - 0.5).abs())
    }
}

/// QR of the block sketch `S𝒜`; `U = R⁻¹`. A rank-deficient sketch is
/// redrawn once with a fresh seed.
pub fn condition(f: &FactoredMatrix, heights: &[usize], m_b: usize, t: usize, seed: u64) -> Result<WellConditionedBasis> {
    condition_p(f, heights, m_b, t, 1.0, seed)
}

/// [`condition`] with an explicit norm index for the scale `d·γ_p`.
pub fn condition_p(
    f: &FactoredMatrix,
    heights: &[usize],
    m_b: usize,
    t: usize,
    p: f64,
    seed: u64,
) -> Result<WellConditionedBasis> {
    let mut resampled = false;
    let mut attempt = 0;
    let (spec, r) = loop {
        let (spec, sa) = BlockSketchSpec::build(f, heights, m_b, t, derive_seed(seed, attempt))?;
        match qr_upper(sa) {
            Ok(r) => break (spec, r),
            Err(Error::RankDeficient { condition }) => {
                if attempt == 1 || spec.is_identity() {
                    return Err(Error::RankDeficient { condition });
                }
                attempt += 1;
                resampled = true;
            }
            Err(e) => return Err(e),
        }
    };
    let u = r.try_inverse().ok_or(Error::RankDeficient {
        condition: f64::INFINITY,
    })?;
    let d = f.ncols();
    let w: usize = heights.iter().product();
    let scale = d as f64 * gamma_p(p, spec.rows_per_block(), w)?;
    Ok(WellConditionedBasis {
        u,
        scale,
        p,
        alpha: (d as f64).sqrt(),
        beta: 1.0,
        heights: heights.to_vec(),
        rows_per_block: spec.rows_per_block(),
        boost: spec.boost(),
        identity: spec.is_identity(),
        resampled,
    })
}
