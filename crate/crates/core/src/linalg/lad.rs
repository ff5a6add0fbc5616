//! Exact weighted least-absolute-deviation regression,
//! `min_x Σ_i w_i |a_iᵀx − b_i|`.
//!
//! This is a vertex-descent simplex in the style of Barrodale and Roberts.
//! A vertex is a set `B` of `d` rows with zero residual. From a vertex we
//! leave one basic row along the edge `±A_B⁻¹e_k` and take an exact line
//! search, which is a weighted median over the residual breakpoints, so a
//! single step may pass several vertices. Phase 1 builds the first vertex
//! the same way, one zero-residual row at a time, starting from `x = 0`.
//!
//! Optimality is certified through the LP dual
//! `max −bᵀy  s.t.  Aᵀy = 0, |y_i| ≤ w_i`: at the final vertex
//! `y_i = w_i·sign(r_i)` off the basis and `y_B = −A_B⁻ᵀ g`, and the reported
//! gap is against the feasible rescaling of that `y`.
//!
//! Only products with `A`, `Aᵀ` and single rows are needed, so the same code
//! runs on a dense sampled matrix or on the implicit Kronecker product.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{dot, norm2, LinearOperator};
use crate::error::{check_len, invalid, Error, Result};

#[derive(Debug, Clone)]
pub struct LadOptions {
    /// Phase-2 pivot cap; `None` means `50·d + 1000`.
    pub max_iterations: Option<usize>,
    /// Rebuild `A_B⁻¹` from scratch after this many rank-one updates.
    pub refactor_every: usize,
    /// Relative dual-feasibility tolerance `|c_k| ≤ (1 + tol)·w_k`.
    pub tolerance: f64,
}

impl Default for LadOptions {
    fn default() -> Self {
        LadOptions {
            max_iterations: None,
            refactor_every: 64,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LadSolution {
    pub x: Vec<f64>,
    /// `Σ w_i |a_iᵀx − b_i|`
    pub objective: f64,
    /// Value of the feasible dual point built at the final vertex.
    pub dual_objective: f64,
    /// `(objective − dual_objective) / objective` (absolute when the
    /// objective is zero).
    pub relative_gap: f64,
    /// Phase-2 pivots.
    pub iterations: usize,
    /// Zero-based rows of the final vertex.
    pub basis: Vec<usize>,
}

struct State<'a, O: LinearOperator + ?Sized> {
    op: &'a O,
    b: &'a [f64],
    w: Vec<f64>,
    x: Vec<f64>,
    r: Vec<f64>,
    in_basis: Vec<bool>,
    zero_tol: f64,
}

impl<O: LinearOperator + ?Sized> State<'_, O> {
    fn sign(&self, i: usize) -> f64 {
        let ri = self.r[i];
        if self.in_basis[i] || ri.abs() <= self.zero_tol {
            0.0
        } else {
            ri.signum()
        }
    }

    /// `g = Aᵀ u` with `u_i = w_i·sign(r_i)` off the basis.
    fn subgradient(&self) -> (Vec<f64>, Vec<f64>) {
        let u: Vec<f64> = (0..self.r.len()).map(|i| self.w[i] * self.sign(i)).collect();
        let mut g = vec![0.0; self.x.len()];
        self.op.apply_transpose(&u, &mut g);
        (u, g)
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.r.len()];
        self.op.apply(v, &mut out);
        out
    }

    fn recompute_residual(&mut self) {
        let mut r = self.apply(&self.x);
        for (ri, bi) in r.iter_mut().zip(self.b) {
            *ri -= bi;
        }
        for (ri, &basic) in r.iter_mut().zip(&self.in_basis) {
            if basic {
                *ri = 0.0;
            }
        }
        self.r = r;
    }

    fn objective(&self) -> f64 {
        self.r.iter().zip(&self.w).map(|(r, w)| w * r.abs()).sum()
    }
}

/// Solves `min_x Σ w_i |a_iᵀx − b_i|` exactly. `weights = None` means unit
/// weights. `A` must have full column rank.
pub fn solve_lad<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    weights: Option<&[f64]>,
    opts: &LadOptions,
) -> Result<LadSolution> {
    let (n, d) = (op.nrows(), op.ncols());
    check_len("lad right-hand side", n, b.len())?;
    if n < d {
        return Err(invalid(alloc::format!(
            "l1 regression needs at least as many rows as columns ({n} < {d})"
        )));
    }
    let w: Vec<f64> = match weights {
        Some(w) => {
            check_len("lad weights", n, w.len())?;
            if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(invalid("l1 weights must be positive and finite"));
            }
            w.to_vec()
        }
        None => vec![1.0; n],
    };
    let bscale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut st = State {
        op,
        b,
        w,
        x: vec![0.0; d],
        r: b.iter().map(|v| -v).collect(),
        in_basis: vec![false; n],
        zero_tol: 1e-13 * bscale,
    };

    let mut basis = phase_one(&mut st)?;
    let mut binv = basis_inverse(op, &basis)?;
    reset_vertex(&mut st, &basis, &binv);

    let max_iter = opts.max_iterations.unwrap_or(50 * d + 1000);
    let mut iterations = 0;
    let mut since_refactor = 0;
    let mut degenerate = false;
    let mut row = vec![0.0; d];
    let (c, u) = loop {
        let (u, g) = st.subgradient();
        let c = binv.tr_mul(&nalgebra::DVector::from_column_slice(&g));

        let mut leave: Option<usize> = None;
        let mut best = 0.0;
        for k in 0..d {
            let wk = st.w[basis[k]];
            let viol = c[k].abs() - wk;
            if viol > opts.tolerance * wk {
                if degenerate {
                    // Bland: lowest row index among violators
                    if leave.is_none_or(|l| basis[k] < basis[l]) {
                        leave = Some(k);
                    }
                } else if viol > best {
                    best = viol;
                    leave = Some(k);
                }
            }
        }
        let k = match leave {
            Some(k) => k,
            None => break (c, u),
        };
        if iterations == max_iter {
            return Err(Error::IterationLimit {
                solver: "lad simplex",
                iterations,
            });
        }
        iterations += 1;

        let sk = c[k].signum();
        let delta: Vec<f64> = binv.column(k).iter().map(|v| -sk * v).collect();
        let v = st.apply(&delta);
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let vtol = 1e-12 * vmax;

        let mut breaks: Vec<(f64, usize, f64)> = Vec::new();
        for i in 0..n {
            if st.in_basis[i] || v[i].abs() <= vtol {
                continue;
            }
            let wi = st.w[i] * v[i].abs();
            if st.r[i].abs() <= st.zero_tol {
                breaks.push((0.0, i, wi));
            } else {
                let t = -st.r[i] / v[i];
                if t > 0.0 {
                    breaks.push((t, i, 2.0 * wi));
                }
            }
        }
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut slope = st.w[basis[k]] - c[k].abs();
        let mut enter = None;
        for &(t, i, inc) in &breaks {
            slope += inc;
            if slope >= 0.0 {
                enter = Some((t, i));
                break;
            }
        }
        let (t, i_in) = enter.ok_or_else(|| Error::Degenerate("l1 objective unbounded along an edge; the design is rank deficient".into()))?;
        degenerate = t == 0.0;

        for (xj, dj) in st.x.iter_mut().zip(&delta) {
            *xj += t * dj;
        }
        for (ri, vi) in st.r.iter_mut().zip(&v) {
            *ri += t * vi;
        }
        let i_out = basis[k];
        st.in_basis[i_out] = false;
        st.in_basis[i_in] = true;
        basis[k] = i_in;
        for &bi in &basis {
            st.r[bi] = 0.0;
        }

        since_refactor += 1;
        op.row(i_in, &mut row);
        let alpha: Vec<f64> = (0..d).map(|j| dot(&row, binv.column(j).as_slice())).collect();
        let pivot = alpha[k];
        if since_refactor >= opts.refactor_every || pivot.abs() < 1e-10 * norm2(&row) * binv.column(k).norm() {
            binv = basis_inverse(op, &basis)?;
            reset_vertex(&mut st, &basis, &binv);
            since_refactor = 0;
        } else {
            let colk = binv.column(k) / pivot;
            for j in 0..d {
                if j != k {
                    let aj = alpha[j];
                    let mut col = binv.column_mut(j);
                    col.axpy(-aj, &colk, 1.0);
                }
            }
            binv.set_column(k, &colk);
        }
    };

    let objective = st.objective();
    let mut y = u;
    let mut rho: f64 = 1.0;
    for k in 0..d {
        y[basis[k]] = -c[k];
        rho = rho.max(c[k].abs() / st.w[basis[k]]);
    }
    let dual_objective = -dot(b, &y) / rho;
    let relative_gap = if objective > 0.0 {
        (objective - dual_objective) / objective
    } else {
        (objective - dual_objective).abs()
    };
    Ok(LadSolution {
        x: st.x,
        objective,
        dual_objective,
        relative_gap,
        iterations,
        basis,
    })
}

/// Builds a first vertex: `d` steps, each moving within the null space of
/// the rows already pinned to zero residual to the exact minimizer along the
/// projected steepest-descent line.
fn phase_one<O: LinearOperator + ?Sized>(st: &mut State<'_, O>) -> Result<Vec<usize>> {
    let (n, d) = (st.r.len(), st.x.len());
    let mut basis = Vec::with_capacity(d);
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut row = vec![0.0; d];
    for _ in 0..d {
        let (_, g) = st.subgradient();
        let mut delta: Vec<f64> = g.iter().map(|v| -v).collect();
        project_out(&mut delta, &ortho);
        if norm2(&delta) <= 1e-12 * norm2(&g) || norm2(&g) == 0.0 {
            // no useful descent direction: take the coordinate axis least
            // covered by the current basis
            let j = (0..d)
                .max_by(|&a, &b| {
                    let ca: f64 = ortho.iter().map(|q| q[a] * q[a]).sum();
                    let cb: f64 = ortho.iter().map(|q| q[b] * q[b]).sum();
                    cb.total_cmp(&ca)
                })
                .unwrap_or(0);
            delta = vec![0.0; d];
            delta[j] = 1.0;
            project_out(&mut delta, &ortho);
        }
        let v = st.apply(&delta);
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let vtol = 1e-10 * vmax;
        let mut breaks: Vec<(f64, usize, f64)> = (0..n)
            .filter(|&i| !st.in_basis[i] && v[i].abs() > vtol)
            .map(|i| (-st.r[i] / v[i], i, st.w[i] * v[i].abs()))
            .collect();
        if breaks.is_empty() {
            return Err(Error::RankDeficient {
                condition: f64::INFINITY,
            });
        }
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let total: f64 = breaks.iter().map(|b| b.2).sum();
        let mut acc = 0.0;
        let mut pick = breaks[breaks.len() - 1];
        for &bk in &breaks {
            acc += bk.2;
            if acc >= 0.5 * total {
                pick = bk;
                break;
            }
        }
        let (t, i) = (pick.0, pick.1);
        for (xj, dj) in st.x.iter_mut().zip(&delta) {
            *xj += t * dj;
        }
        for (ri, vi) in st.r.iter_mut().zip(&v) {
            *ri += t * vi;
        }
        st.r[i] = 0.0;
        st.in_basis[i] = true;
        basis.push(i);
        st.op.row(i, &mut row);
        let mut q = row.clone();
        project_out(&mut q, &ortho);
        project_out(&mut q, &ortho);
        let nq = norm2(&q);
        if nq == 0.0 {
            return Err(Error::RankDeficient {
                condition: f64::INFINITY,
            });
        }
        q.iter_mut().for_each(|v| *v /= nq);
        ortho.push(q);
    }
    Ok(basis)
}

fn project_out(v: &mut [f64], ortho: &[Vec<f64>]) {
    for q in ortho {
        let c = dot(v, q);
        for (vi, qi) in v.iter_mut().zip(q) {
            *vi -= c * qi;
        }
    }
}

fn basis_inverse<O: LinearOperator + ?Sized>(op: &O, basis: &[usize]) -> Result<DMatrix<f64>> {
    let d = basis.len();
    let mut m = DMatrix::zeros(d, d);
    let mut row = vec![0.0; d];
    for (k, &i) in basis.iter().enumerate() {
        op.row(i, &mut row);
        for j in 0..d {
            m[(k, j)] = row[j];
        }
    }
    m.try_inverse().ok_or(Error::RankDeficient {
        condition: f64::INFINITY,
    })
}

/// Snap `x` onto the vertex defined by the basis and refresh residuals.
fn reset_vertex<O: LinearOperator + ?Sized>(st: &mut State<'_, O>, basis: &[usize], binv: &DMatrix<f64>) {
    let bb = nalgebra::DVector::from_iterator(basis.len(), basis.iter().map(|&i| st.b[i]));
    let x = binv * bb;
    st.x.copy_from_slice(x.as_slice());
    st.recompute_residual();
}
