use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseSketchKind {
    Gaussian,
    /// Standard Cauchy, drawn as a ratio of two independent standard normals.
    Cauchy,
}

/// An i.i.d. random matrix reproducible from its seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenseSketch {
    pub kind: DenseSketchKind,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl DenseSketch {
    pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Self {
        DenseSketch {
            kind: DenseSketchKind::Gaussian,
            rows,
            cols,
            seed,
        }
    }

    pub fn cauchy(rows: usize, cols: usize, seed: u64) -> Self {
        DenseSketch {
            kind: DenseSketchKind::Cauchy,
            rows,
            cols,
            seed,
        }
    }

    /// Entries are drawn row by row.
    pub fn materialize(&self) -> DMatrix<f64> {
        dense_sketch_materialize(self)
    }
}

fn cauchy(rng: &mut Rng) -> f64 {
    let num: f64 = StandardNormal.sample(rng);
    loop {
        let den: f64 = StandardNormal.sample(rng);
        if den != 0.0 {
            return num / den;
        }
    }
}

pub fn dense_sketch_materialize(spec: &DenseSketch) -> DMatrix<f64> {
    let mut rng = rng_from_seed(spec.seed);
    let mut out = DMatrix::zeros(spec.rows, spec.cols);
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            out[(r, c)] = match spec.kind {
                DenseSketchKind::Gaussian => StandardNormal.sample(&mut rng),
                DenseSketchKind::Cauchy => cauchy(&mut rng),
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::median;
    use alloc::vec::Vec;

    #[test]
    fn reproducible() {
        let s = DenseSketch::cauchy(7, 9, 3);
        assert_eq!(s.materialize(), s.materialize());
        let g = DenseSketch::gaussian(7, 9, 3);
        assert_eq!(g.materialize(), g.materialize());
        assert_ne!(g.materialize(), DenseSketch::gaussian(7, 9, 4).materialize());
    }

    #[test]
    fn gaussian_moments() {
        let g = DenseSketch::gaussian(100, 100, 11).materialize();
        let mean = g.mean();
        let var = g.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (g.len() as f64 - 1.0);
        assert!(mean.abs() < 0.05);
        assert!((var - 1.0).abs() < 0.1);
    }

    #[test]
    fn cauchy_absolute_median_is_one() {
        let c = DenseSketch::cauchy(100, 100, 12).materialize();
        let abs: Vec<f64> = c.iter().map(|v| v.abs()).collect();
        assert!((median(&abs) - 1.0).abs() < 0.15);
    }
}
