//! Sketched regression over implicit Kronecker-product design matrices.
//!
//! The design matrix `A_1 ⊗ … ⊗ A_q` is never formed. Every solver works
//! from the factors: TensorSketch (CountSketch with a hash and sign that
//! decompose over Kronecker coordinates) compresses the row space for ℓ2,
//! nonnegative and P-spline penalized least squares, and a block sketch plus
//! Cauchy-median column estimates drive row sampling for ℓ1 regression.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, timing and the
//! command line live in the `kronsketch` crate.
//!
//! Vectorization is row-major throughout: for `q = 2`,
//! `(A_1 ⊗ A_2) · vec(X) = vec(A_1 X A_2ᵀ)` where `vec` stacks the rows of
//! the `d_1 × d_2` matrix `X`, and row `(i_1, i_2)` of the product has linear
//! index `(i_1 − 1)·n_2 + i_2` (1-based).

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod l1;
pub mod l2;
pub mod linalg;
pub mod oracle;
pub mod pspline;
pub mod rng;
pub mod sketch;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{FactoredMatrix, IndexTuple};

/// Default cap on the number of entries of any dense matrix built from the
/// full `n × d` design (oracle paths only).
pub const DEFAULT_ORACLE_CAP: usize = 1 << 24;

/// Default cap on `m · (d + 1)` for the dense sketched system.
pub const DEFAULT_SKETCH_MEMORY_CAP: usize = 1 << 28;
