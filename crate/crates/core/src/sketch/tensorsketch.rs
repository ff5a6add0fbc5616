//! TensorSketch: CountSketch with the composed hash
//! `H(i_1, …, i_q) = (Σ_k h_k(i_k)) mod m` and sign `S = Π_k s_k(i_k)`.
//!
//! On a Kronecker vector `v_1 ⊗ … ⊗ v_q` the sketch is the product of the
//! per-factor CountSketch polynomials `p_k(x) = Σ_i s_k(i) v_k[i] x^{h_k(i)}`
//! modulo `x^m − 1`. We multiply them with one zero-padded FFT of length at
//! least `q(m − 1) + 1`, so the linear product is exact, and fold the
//! coefficients mod `m` afterwards.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fft::Fft;
use super::hash::HashFamily;
use crate::error::{check_len, invalid, Error, Result};
use crate::rng::derive_seed;
use crate::tensor::FactoredMatrix;

#[derive(Debug, Clone)]
pub struct TensorSketchSpec {
    m: usize,
    seed: u64,
    domains: Vec<usize>,
    bucket_families: Vec<HashFamily>,
    sign_families: Vec<HashFamily>,
    buckets: Vec<Vec<usize>>,
    signs: Vec<Vec<f64>>,
}

impl TensorSketchSpec {
    /// One bucket and one sign family per factor domain `n_k`, all derived
    /// from `seed`.
    pub fn new(domains: &[usize], m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("sketch dimension m must be positive"));
        }
        if domains.is_empty() || domains.contains(&0) {
            return Err(invalid("tensor sketch needs at least one nonempty factor domain"));
        }
        let mut bucket_families = Vec::with_capacity(domains.len());
        let mut sign_families = Vec::with_capacity(domains.len());
        for (k, &n) in domains.iter().enumerate() {
            bucket_families.push(HashFamily::bucket(n, m, derive_seed(seed, 2 * k as u64))?);
            sign_families.push(HashFamily::sign(n, derive_seed(seed, 2 * k as u64 + 1))?);
        }
        let buckets = bucket_families.iter().map(HashFamily::bucket_table).collect();
        let signs = sign_families.iter().map(HashFamily::sign_table).collect();
        Ok(TensorSketchSpec {
            m,
            seed,
            domains: domains.to_vec(),
            bucket_families,
            sign_families,
            buckets,
            signs,
        })
    }

    /// A spec sized for the rows of `f`.
    pub fn for_matrix(f: &FactoredMatrix, m: usize, seed: u64) -> Result<Self> {
        Self::new(f.row_dims(), m, seed)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.domains.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn bucket_families(&self) -> &[HashFamily] {
        &self.bucket_families
    }

    pub fn sign_families(&self) -> &[HashFamily] {
        &self.sign_families
    }

    /// `(H, S)` of a zero-based tuple.
    pub fn bucket_and_sign(&self, tuple0: &[usize]) -> (usize, f64) {
        let mut h = 0usize;
        let mut s = 1.0;
        for (k, &i) in tuple0.iter().enumerate() {
            h += self.buckets[k][i];
            if h >= self.m {
                h -= self.m;
            }
            s *= self.signs[k][i];
        }
        (h, s)
    }

    fn fft_len(&self) -> usize {
        (self.q() * (self.m - 1) + 1).next_power_of_two()
    }

    fn spectrum(&self, k: usize, v: &[f64], fft: &Fft) -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); fft.len()];
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                buf[self.buckets[k][i]].re += self.signs[k][i] * vi;
            }
        }
        fft.forward(&mut buf);
        buf
    }

    fn fold_into(&self, mut prod: Vec<Complex64>, fft: &Fft, out: &mut [f64]) {
        fft.inverse(&mut prod);
        out.iter_mut().for_each(|o| *o = 0.0);
        let useful = self.q() * (self.m - 1) + 1;
        for (j, c) in prod.iter().take(useful).enumerate() {
            out[j % self.m] += c.re;
        }
    }

    fn direct(&self, k: usize, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                out[self.buckets[k][i]] += self.signs[k][i] * vi;
            }
        }
    }
}

/// Sketch of `v_1 ⊗ … ⊗ v_q` without forming it.
pub fn tensorsketch_apply_vectors(spec: &TensorSketchSpec, vectors: &[&[f64]]) -> Result<Vec<f64>> {
    check_len("tensorsketch factor count", spec.q(), vectors.len())?;
    for (k, v) in vectors.iter().enumerate() {
        check_len("tensorsketch factor vector", spec.domains[k], v.len())?;
    }
    let mut out = vec![0.0; spec.m];
    if spec.q() == 1 {
        spec.direct(0, vectors[0], &mut out);
        return Ok(out);
    }
    let fft = Fft::new(spec.fft_len())?;
    let mut prod = spec.spectrum(0, vectors[0], &fft);
    for (k, v) in vectors.iter().enumerate().skip(1) {
        let sp = spec.spectrum(k, v, &fft);
        for (p, s) in prod.iter_mut().zip(&sp) {
            *p *= s;
        }
    }
    spec.fold_into(prod, &fft, &mut out);
    Ok(out)
}

/// `S·𝒜` as a dense `m × d` matrix. Column `(c_1, …, c_q)` of `𝒜` is the
/// Kronecker product of factor columns, so it is sketched by the FFT path;
/// factor-column spectra are computed once and reused.
pub fn tensorsketch_apply_factored(spec: &TensorSketchSpec, f: &FactoredMatrix) -> Result<DMatrix<f64>> {
    check_len("tensorsketch factor count", spec.q(), f.q())?;
    for (k, &n) in f.row_dims().iter().enumerate() {
        check_len("tensorsketch factor rows", spec.domains[k], n)?;
    }
    let d = f.ncols();
    let mut out = DMatrix::zeros(spec.m, d);
    let cols: Vec<Vec<Vec<f64>>> = f
        .factors()
        .iter()
        .map(|a| (0..a.ncols()).map(|c| a.column(c).iter().copied().collect()).collect())
        .collect();

    if spec.q() == 1 {
        for c in 0..d {
            let mut col = vec![0.0; spec.m];
            spec.direct(0, &cols[0][c], &mut col);
            out.column_mut(c).copy_from_slice(&col);
        }
        return Ok(out);
    }

    let fft = Fft::new(spec.fft_len())?;
    let spectra: Vec<Vec<Vec<Complex64>>> = cols
        .iter()
        .enumerate()
        .map(|(k, fc)| fc.iter().map(|v| spec.spectrum(k, v, &fft)).collect())
        .collect();
    let col_dims = f.col_dims();
    let mut idx = vec![0usize; spec.q()];
    let mut col = vec![0.0; spec.m];
    for c in 0..d {
        let mut prod = spectra[0][idx[0]].clone();
        for k in 1..spec.q() {
            for (p, s) in prod.iter_mut().zip(&spectra[k][idx[k]]) {
                *p *= s;
            }
        }
        spec.fold_into(prod, &fft, &mut col);
        out.column_mut(c).copy_from_slice(&col);
        // odometer over column tuples, last factor fastest
        for k in (0..spec.q()).rev() {
            idx[k] += 1;
            if idx[k] < col_dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

/// `S·b` for a plain vector of length `n = ∏ n_k`, in row-major tuple order.
pub fn tensorsketch_apply_dense(spec: &TensorSketchSpec, b: &[f64]) -> Result<Vec<f64>> {
    let n = spec
        .domains
        .iter()
        .try_fold(1usize, |acc, &x| acc.checked_mul(x))
        .ok_or(Error::Overflow)?;
    check_len("tensorsketch dense input", n, b.len())?;
    let mut out = vec![0.0; spec.m];
    let mut tuple = vec![0usize; spec.q()];
    for &br in b {
        if br != 0.0 {
            let (h, s) = spec.bucket_and_sign(&tuple);
            out[h] += s * br;
        }
        for k in (0..spec.q()).rev() {
            tuple[k] += 1;
            if tuple[k] < spec.domains[k] {
                break;
            }
            tuple[k] = 0;
        }
    }
    Ok(out)
}
