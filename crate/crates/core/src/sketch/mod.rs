//! Random sketching operators. All randomness comes from explicit seeds.

mod block;
mod countsketch;
mod dense;
mod fft;
mod hash;
mod tensorsketch;

pub use block::{block_sketch_apply, boosted_block_sketch, BlockOperator, BlockSketchSpec};
pub use countsketch::countsketch_apply;
pub use dense::{dense_sketch_materialize, DenseSketch, DenseSketchKind};
pub use fft::Fft;
pub use hash::{HashFamily, MERSENNE_61};
pub use tensorsketch::{
    tensorsketch_apply_dense, tensorsketch_apply_factored, tensorsketch_apply_vectors, TensorSketchSpec,
};

/// `2 + 3^q`, the variance constant of a `q`-fold TensorSketch.
pub fn tensor_variance_factor(q: usize) -> f64 {
    2.0 + pow3(q)
}

fn pow3(q: usize) -> f64 {
    (0..q).fold(1.0, |acc, _| acc * 3.0)
}

/// Sketch rows for a `k`-dimensional subspace embedding with distortion
/// `eps` and failure probability `delta`: `⌈k²(2 + 3^q)/(ε²δ)⌉`.
pub fn ose_sketch_size(k: usize, q: usize, eps: f64, delta: f64) -> usize {
    let kf = k as f64;
    let v = kf * kf * tensor_variance_factor(q) / (eps * eps * delta);
    num_traits::Float::ceil(v) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ose_size_example() {
        assert_eq!(ose_sketch_size(4, 2, 0.5, 0.1), 7040);
        assert_eq!(tensor_variance_factor(3), 29.0);
    }
}
