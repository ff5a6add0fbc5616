//! Small dense solvers the sketched problems reduce to, plus a row-access
//! operator abstraction shared by dense matrices and [`FactoredMatrix`].

mod lad;
mod lstsq;
mod nnls;

pub use lad::{solve_lad, LadOptions, LadSolution};
pub use lstsq::{dense_lstsq, lstsq_owned, qr_upper, solve_upper_triangular, stacked_lstsq};
pub use nnls::{nnls, NnlsOptions};

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::tensor::FactoredMatrix;

/// A matrix that can be applied, transposed-applied and read row by row.
/// All indices are zero-based.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `out = A x`
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// `out = Aᵀ y`
    fn apply_transpose(&self, y: &[f64], out: &mut [f64]);
    /// `out = A[i, :]`
    fn row(&self, i: usize, out: &mut [f64]);
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        DMatrix::nrows(self)
    }

    fn ncols(&self) -> usize {
        DMatrix::ncols(self)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let x = DVector::from_column_slice(x);
        let y = self * x;
        out.copy_from_slice(y.as_slice());
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        let y = DVector::from_column_slice(y);
        let x = self.tr_mul(&y);
        out.copy_from_slice(x.as_slice());
    }

    fn row(&self, i: usize, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(DMatrix::row(self, i).iter()) {
            *o = *v;
        }
    }
}

impl LinearOperator for FactoredMatrix {
    fn nrows(&self) -> usize {
        FactoredMatrix::nrows(self)
    }

    fn ncols(&self) -> usize {
        FactoredMatrix::ncols(self)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let y = self.kron_matvec(x).expect("operator input length");
        out.copy_from_slice(&y);
    }

    fn apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        let x = self.kron_rmatvec(y).expect("operator input length");
        out.copy_from_slice(&x);
    }

    fn row(&self, i: usize, out: &mut [f64]) {
        self.row0_into(i, out);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    #[allow(unused_imports)] // redundant once std is linked into the build
    use num_traits::Float;
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

/// `A x − b` for any operator.
pub fn residual<O: LinearOperator + ?Sized>(op: &O, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = alloc::vec![0.0; op.nrows()];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    r
}

/// Median of a slice (upper median for even lengths); sorts a copy.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}
