use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// `(d − ℓ) × d` matrix of `ℓ`-th order forward differences: row `i` holds
/// `(−1)^{ℓ−k}·C(ℓ, k)` at column `i + k`.
pub fn difference_matrix(d: usize, order: usize) -> Result<DMatrix<f64>> {
    if order == 0 || order >= d {
        return Err(invalid(alloc::format!(
            "difference order {order} must satisfy 1 <= order < d = {d}"
        )));
    }
    let mut stencil = Vec::with_capacity(order + 1);
    let mut binom = 1.0;
    for k in 0..=order {
        let sign = if (order - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        stencil.push(sign * binom);
        binom = binom * (order - k) as f64 / (k + 1) as f64;
    }
    let mut l = DMatrix::zeros(d - order, d);
    for i in 0..d - order {
        for (k, &c) in stencil.iter().enumerate() {
            l[(i, i + k)] = c;
        }
    }
    Ok(l)
}

/// Tensor-product difference penalty on row-major coefficients of shape
/// `d_1 × … × d_q`: the blocks `I ⊗ … ⊗ L_ℓ(d_k) ⊗ … ⊗ I` stacked for
/// `k = 1..q`, so each block differences along one coordinate.
pub fn tensor_penalty(dims: &[usize], order: usize) -> Result<DMatrix<f64>> {
    if dims.is_empty() {
        return Err(invalid("tensor penalty needs at least one dimension"));
    }
    let d = dims
        .iter()
        .try_fold(1usize, |acc, &x| acc.checked_mul(x))
        .ok_or(Error::Overflow)?;
    let mut blocks = Vec::with_capacity(dims.len());
    for k in 0..dims.len() {
        let mut block = DMatrix::from_element(1, 1, 1.0);
        for (j, &dj) in dims.iter().enumerate() {
            let factor = if j == k {
                difference_matrix(dj, order)?
            } else {
                DMatrix::identity(dj, dj)
            };
            block = block.kronecker(&factor);
        }
        blocks.push(block);
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, d);
    let mut at = 0;
    for b in blocks {
        out.rows_mut(at, b.nrows()).copy_from(&b);
        at += b.nrows();
    }
    Ok(out)
}

/// A penalty `λ‖Lx‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    /// Difference order when built by [`PenaltySpec::difference`].
    pub order: Option<usize>,
    pub matrix: DMatrix<f64>,
    pub lambda: f64,
}

impl PenaltySpec {
    /// Tensor-product difference penalty of the given order.
    pub fn difference(dims: &[usize], order: usize, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(PenaltySpec {
            order: Some(order),
            matrix: tensor_penalty(dims, order)?,
            lambda,
        })
    }

    pub fn explicit(matrix: DMatrix<f64>, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(PenaltySpec {
            order: None,
            matrix,
            lambda,
        })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(PenaltySpec {
            lambda,
            ..self.clone()
        })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(alloc::format!("lambda must be finite and nonnegative, got {lambda}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn first_and_second_order_examples() {
        let l1 = difference_matrix(4, 1).unwrap();
        let expect = DMatrix::from_row_slice(3, 4, &[-1.0, 1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, -1.0, 1.0]);
        assert_eq!(l1, expect);
        let l2 = difference_matrix(5, 2).unwrap();
        assert_eq!(l2.row(0).iter().copied().collect::<Vec<_>>(), [1.0, -2.0, 1.0, 0.0, 0.0]);
        let l3 = difference_matrix(6, 3).unwrap();
        assert_eq!(l3.row(0).iter().copied().collect::<Vec<_>>(), [-1.0, 3.0, -3.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn annihilates_low_degree_polynomials() {
        for order in 1..=3 {
            let l = difference_matrix(10, order).unwrap();
            for deg in 0..order {
                let p = DVector::from_fn(10, |i, _| (i as f64).powi(deg as i32));
                assert!((&l * p).amax() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_order() {
        assert!(difference_matrix(3, 3).is_err());
        assert!(difference_matrix(3, 0).is_err());
    }

    #[test]
    fn tensor_penalty_differences_each_axis() {
        let l = tensor_penalty(&[4, 3], 1).unwrap();
        assert_eq!(l.shape(), (3 * 3 + 4 * 2, 12));
        // X[k1][k2] = k1 varies only along axis 1: only the first block sees it
        let x = DVector::from_fn(12, |i, _| (i / 3) as f64);
        let lx = &l * x;
        assert!(lx.rows(0, 9).iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(lx.rows(9, 8).iter().all(|&v| v.abs() < 1e-12));
        // null space of the stacked penalty is the constants
        let ones = DVector::from_element(12, 1.0);
        assert!((&l * ones).amax() < 1e-12);
    }
}
