//! Penalized (P-spline) regression: B-spline bases, difference penalties,
//! generalized singular values and the statistical dimension that sizes
//! the sketch.

mod bspline;
mod gsvd;
mod penalty;
mod solve;

pub use bspline::{basis_size, bspline_basis, clamped_knots};
pub use gsvd::{gsvd_factored, gsvd_pair, ridge_stat_dim, stat_dim, GsvdResult};
pub use penalty::{difference_matrix, tensor_penalty, PenaltySpec};
pub use solve::{
    penalized_lstsq, penalized_lstsq_factored, penalized_objective, pspline_sketch_size, sketched_pspline,
    PsplineOptions, PsplineSolution,
};
