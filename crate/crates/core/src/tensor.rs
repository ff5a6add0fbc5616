//! Implicit Kronecker-product matrices.
//!
//! A [`FactoredMatrix`] stores the factors `A_1, …, A_q` of
//! `𝒜 = A_1 ⊗ … ⊗ A_q` and answers products, rows and index conversions
//! without forming `𝒜`. No method allocates more than a couple of vectors of
//! length `max(n, d)`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{check_len, invalid, Error, Result};

/// A multi-index `(i_1, …, i_q)` into the rows of a [`FactoredMatrix`].
///
/// Components are 1-based: `1 ≤ i_k ≤ n_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexTuple(pub Vec<usize>);

impl IndexTuple {
    pub fn new(components: Vec<usize>) -> Self {
        IndexTuple(components)
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }
}

/// `𝒜 = A_1 ⊗ … ⊗ A_q`, held as its dense factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredMatrix {
    factors: Vec<DMatrix<f64>>,
    // Row-major copies of the factors; the hot loops below walk rows.
    row_major: Vec<Vec<f64>>,
    row_dims: Vec<usize>,
    col_dims: Vec<usize>,
    n: usize,
    d: usize,
}

impl FactoredMatrix {
    /// Validates shapes (`q ≥ 1`, `n_i ≥ d_i ≥ 1`, finite entries, no
    /// overflow in `∏ n_i` or `∏ d_i`). Column rank is not checked here;
    /// solvers report rank deficiency when they meet it.
    pub fn new(factors: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::build(factors, true)
    }

    // Row blocks of a valid matrix may be shorter than they are wide.
    fn build(factors: Vec<DMatrix<f64>>, require_tall: bool) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("a factored matrix needs at least one factor"));
        }
        let mut n: usize = 1;
        let mut d: usize = 1;
        for (k, a) in factors.iter().enumerate() {
            if a.ncols() == 0 || a.nrows() == 0 || (require_tall && a.nrows() < a.ncols()) {
                return Err(invalid(alloc::format!(
                    "factor {} has shape {}x{}; need n_i >= d_i >= 1",
                    k + 1,
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(invalid(alloc::format!("factor {} has non-finite entries", k + 1)));
            }
            n = n.checked_mul(a.nrows()).ok_or(Error::Overflow)?;
            d = d.checked_mul(a.ncols()).ok_or(Error::Overflow)?;
        }
        let row_major = factors
            .iter()
            .map(|a| {
                let mut buf = Vec::with_capacity(a.len());
                for i in 0..a.nrows() {
                    buf.extend(a.row(i).iter().copied());
                }
                buf
            })
            .collect();
        Ok(FactoredMatrix {
            row_dims: factors.iter().map(|a| a.nrows()).collect(),
            col_dims: factors.iter().map(|a| a.ncols()).collect(),
            factors,
            row_major,
            n,
            d,
        })
    }

    pub fn factors(&self) -> &[DMatrix<f64>] {
        &self.factors
    }

    pub fn into_factors(self) -> Vec<DMatrix<f64>> {
        self.factors
    }

    /// Number of factors `q`.
    pub fn q(&self) -> usize {
        self.factors.len()
    }

    /// `n = ∏ n_i`.
    pub fn nrows(&self) -> usize {
        self.n
    }

    /// `d = ∏ d_i`.
    pub fn ncols(&self) -> usize {
        self.d
    }

    pub fn row_dims(&self) -> &[usize] {
        &self.row_dims
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    /// Linear row index (1-based) of a row tuple, lexicographic with the
    /// last factor varying fastest: `((i_1−1)·n_2 + (i_2−1))·n_3 + … + i_q`.
    pub fn row_index(&self, t: &IndexTuple) -> Result<usize> {
        check_len("row_index tuple length", self.q(), t.0.len())?;
        let mut r = 0usize;
        for (k, (&i, &nk)) in t.0.iter().zip(&self.row_dims).enumerate() {
            if i == 0 || i > nk {
                return Err(Error::IndexOutOfRange {
                    context: factor_context(k),
                    index: i,
                    bound: nk,
                });
            }
            r = r * nk + (i - 1);
        }
        Ok(r + 1)
    }

    /// Inverse of [`row_index`](Self::row_index); `r` is 1-based.
    pub fn linear_to_tuple(&self, r: usize) -> Result<IndexTuple> {
        self.check_row(r)?;
        let mut t = vec![0usize; self.q()];
        self.tuple0_into(r - 1, &mut t);
        for c in t.iter_mut() {
            *c += 1;
        }
        Ok(IndexTuple(t))
    }

    /// Zero-based tuple of zero-based row `r0`.
    pub(crate) fn tuple0_into(&self, mut r0: usize, out: &mut [usize]) {
        for k in (0..self.q()).rev() {
            let nk = self.row_dims[k];
            out[k] = r0 % nk;
            r0 /= nk;
        }
    }

    fn check_row(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.n {
            Err(Error::IndexOutOfRange {
                context: "row of the Kronecker product",
                index: r,
                bound: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// Row `r` (1-based) of `𝒜`: the Kronecker product of the factor rows.
    pub fn kron_row(&self, r: usize) -> Result<Vec<f64>> {
        self.check_row(r)?;
        let mut out = vec![0.0; self.d];
        self.row0_into(r - 1, &mut out);
        Ok(out)
    }

    /// Zero-based row into a caller buffer of length `d`.
    pub(crate) fn row0_into(&self, r0: usize, out: &mut [f64]) {
        let mut tuple = [0usize; 16];
        let mut heap;
        let t: &mut [usize] = if self.q() <= 16 {
            &mut tuple[..self.q()]
        } else {
            heap = vec![0usize; self.q()];
            &mut heap[..]
        };
        self.tuple0_into(r0, t);
        out[0] = 1.0;
        let mut len = 1;
        for k in 0..self.q() {
            let dk = self.col_dims[k];
            let row = &self.row_major[k][t[k] * dk..(t[k] + 1) * dk];
            // expand in place from the back so earlier entries stay readable
            for a in (0..len).rev() {
                let v = out[a];
                for (c, &f) in row.iter().enumerate().rev() {
                    out[a * dk + c] = v * f;
                }
            }
            len *= dk;
        }
    }

    /// `𝒜 x`, one factor contraction at a time.
    pub fn kron_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("kron_matvec input", self.d, x.len())?;
        Ok(self.contract(x, false))
    }

    /// `𝒜ᵀ y`.
    pub fn kron_rmatvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("kron_rmatvec input", self.n, y.len())?;
        Ok(self.contract(y, true))
    }

    fn contract(&self, input: &[f64], transpose: bool) -> Vec<f64> {
        let mut shape: Vec<usize> = if transpose {
            self.row_dims.clone()
        } else {
            self.col_dims.clone()
        };
        let mut cur = input.to_vec();
        for k in 0..self.q() {
            let (rows, cols) = (self.row_dims[k], self.col_dims[k]);
            let (out_dim, in_dim) = if transpose { (cols, rows) } else { (rows, cols) };
            let left: usize = shape[..k].iter().product();
            let right: usize = shape[k + 1..].iter().product();
            let a = &self.row_major[k];
            let mut next = vec![0.0; left * out_dim * right];
            for l in 0..left {
                let src = &cur[l * in_dim * right..(l + 1) * in_dim * right];
                let dst = &mut next[l * out_dim * right..(l + 1) * out_dim * right];
                for i in 0..out_dim {
                    let out_row = &mut dst[i * right..(i + 1) * right];
                    for c in 0..in_dim {
                        let coef = if transpose { a[c * cols + i] } else { a[i * cols + c] };
                        if coef == 0.0 {
                            continue;
                        }
                        let in_row = &src[c * right..(c + 1) * right];
                        for (o, &v) in out_row.iter_mut().zip(in_row) {
                            *o += coef * v;
                        }
                    }
                }
            }
            shape[k] = out_dim;
            cur = next;
        }
        cur
    }

    /// Gram matrix `𝒜ᵀ𝒜 = ⊗_k A_kᵀ A_k`, a dense `d × d` matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::from_element(1, 1, 1.0);
        for a in &self.factors {
            g = g.kronecker(&(a.transpose() * a));
        }
        g
    }

    /// The sub-Kronecker product whose factor `k` keeps rows
    /// `block[k]·w[k] .. (block[k]+1)·w[k]` (zero-based block indices).
    pub fn row_block(&self, block: &[usize], w: &[usize]) -> Result<FactoredMatrix> {
        check_len("row block index", self.q(), block.len())?;
        check_len("row block heights", self.q(), w.len())?;
        let mut factors = Vec::with_capacity(self.q());
        for (k, a) in self.factors.iter().enumerate() {
            let start = block[k] * w[k];
            if w[k] == 0 || start + w[k] > a.nrows() {
                return Err(Error::IndexOutOfRange {
                    context: "row block",
                    index: block[k] + 1,
                    bound: a.nrows() / w[k].max(1),
                });
            }
            factors.push(a.rows(start, w[k]).into_owned());
        }
        FactoredMatrix::build(factors, false)
    }

    /// Splits `𝒜 = L ⊗ R` with `L = A_1 ⊗ … ⊗ A_{q1}`; `R` is `None` when
    /// `q1 = q`.
    pub fn split_at(&self, q1: usize) -> Result<(FactoredMatrix, Option<FactoredMatrix>)> {
        if q1 == 0 || q1 > self.q() {
            return Err(invalid(alloc::format!(
                "split point {} outside 1..={}",
                q1,
                self.q()
            )));
        }
        let left = FactoredMatrix::new(self.factors[..q1].to_vec())?;
        let right = if q1 < self.q() {
            Some(FactoredMatrix::new(self.factors[q1..].to_vec())?)
        } else {
            None
        };
        Ok((left, right))
    }

    /// `c · 𝒜`, scaling the first factor.
    pub fn scaled(&self, c: f64) -> Result<FactoredMatrix> {
        let mut factors = self.factors.clone();
        factors[0] *= c;
        FactoredMatrix::new(factors)
    }
}

fn factor_context(k: usize) -> &'static str {
    match k {
        0 => "tuple component 1",
        1 => "tuple component 2",
        2 => "tuple component 3",
        _ => "tuple component",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::materialize;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn random_factor(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    }

    fn shape(n: &[usize], d: &[usize], seed: u64) -> FactoredMatrix {
        let factors = n
            .iter()
            .zip(d)
            .enumerate()
            .map(|(k, (&r, &c))| random_factor(r, c, seed + k as u64))
            .collect();
        FactoredMatrix::new(factors).unwrap()
    }

    #[test]
    fn row_index_examples() {
        let f = shape(&[3, 4], &[1, 1], 1);
        assert_eq!(f.row_index(&IndexTuple::new(vec![1, 1])).unwrap(), 1);
        assert_eq!(f.row_index(&IndexTuple::new(vec![2, 3])).unwrap(), 7);
        let g = shape(&[2, 2, 2], &[1, 1, 1], 1);
        assert_eq!(g.row_index(&IndexTuple::new(vec![2, 2, 2])).unwrap(), 8);
    }

    #[test]
    fn row_index_rejects_out_of_range() {
        let f = shape(&[3, 4], &[1, 1], 1);
        assert!(matches!(
            f.row_index(&IndexTuple::new(vec![4, 1])),
            Err(Error::IndexOutOfRange { index: 4, bound: 3, .. })
        ));
        assert!(f.row_index(&IndexTuple::new(vec![0, 1])).is_err());
        assert!(f.row_index(&IndexTuple::new(vec![1])).is_err());
    }

    #[test]
    fn linear_to_tuple_examples() {
        let f = shape(&[3, 4], &[1, 1], 1);
        assert_eq!(f.linear_to_tuple(7).unwrap().0, vec![2, 3]);
        assert_eq!(f.linear_to_tuple(1).unwrap().0, vec![1, 1]);
        assert_eq!(f.linear_to_tuple(12).unwrap().0, vec![3, 4]);
        assert!(f.linear_to_tuple(0).is_err());
        assert!(f.linear_to_tuple(13).is_err());
    }

    #[test]
    fn construction_validates_shapes() {
        assert!(FactoredMatrix::new(vec![]).is_err());
        assert!(FactoredMatrix::new(vec![DMatrix::zeros(2, 3)]).is_err());
        assert!(FactoredMatrix::new(vec![DMatrix::zeros(2, 0)]).is_err());
        let mut bad = DMatrix::zeros(2, 1);
        bad[(0, 0)] = f64::NAN;
        assert!(FactoredMatrix::new(vec![bad]).is_err());
    }

    #[test]
    fn matvec_identity_and_ones() {
        let f = FactoredMatrix::new(vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2)]).unwrap();
        assert_eq!(f.kron_matvec(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.kron_rmatvec(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        let ones = FactoredMatrix::new(vec![DMatrix::from_element(2, 1, 1.0); 2]).unwrap();
        assert_eq!(ones.kron_matvec(&[2.5]).unwrap(), vec![2.5; 4]);
        assert_eq!(ones.kron_row(3).unwrap(), vec![1.0]);
        assert_eq!(f.kron_row(3).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(f.kron_rmatvec(&[0.0; 4]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn matvec_matches_dense_oracle() {
        let f = shape(&[3, 4], &[2, 2], 11);
        let dense = materialize(&f, usize::MAX).unwrap();
        let x = [0.3, -1.2, 2.0, 0.7];
        let y = f.kron_matvec(&x).unwrap();
        let expect = &dense * nalgebra::DVector::from_column_slice(&x);
        for (a, b) in y.iter().zip(expect.iter()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let z: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let yt = f.kron_rmatvec(&z).unwrap();
        let expect_t = dense.transpose() * nalgebra::DVector::from_column_slice(&z);
        for (a, b) in yt.iter().zip(expect_t.iter()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        for r in 1..=12 {
            let row = f.kron_row(r).unwrap();
            for c in 0..4 {
                assert!((row[c] - dense[(r - 1, c)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gram_matches_dense() {
        let f = shape(&[5, 4, 3], &[2, 3, 1], 5);
        let dense = materialize(&f, usize::MAX).unwrap();
        let g = f.gram();
        let expect = dense.transpose() * &dense;
        assert!((g - expect).norm() < 1e-10);
    }

    #[test]
    fn row_block_and_split() {
        let f = shape(&[4, 6], &[2, 3], 3);
        let blk = f.row_block(&[1, 2], &[2, 2]).unwrap();
        assert_eq!(blk.row_dims(), &[2, 2]);
        assert_eq!(blk.factors()[0], f.factors()[0].rows(2, 2).into_owned());
        assert_eq!(blk.factors()[1], f.factors()[1].rows(4, 2).into_owned());
        assert!(f.row_block(&[2, 0], &[2, 2]).is_err());
        let (l, r) = f.split_at(1).unwrap();
        assert_eq!(l.nrows(), 4);
        assert_eq!(r.unwrap().nrows(), 6);
        assert!(f.split_at(2).unwrap().1.is_none());
        assert!(f.split_at(3).is_err());
    }
}
