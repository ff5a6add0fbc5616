//! Dense-tableau bounded-variable simplex for
//! `min cᵀz  s.t.  M z = h,  0 ≤ z ≤ u`, with a phase-1 on artificial
//! variables and Bland's rule throughout. Only meant for small problems.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub z: Vec<f64>,
    pub objective: f64,
    /// Basic original variables, one per constraint row.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

struct Tableau {
    t: DMatrix<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    upper: Vec<f64>,
    value: Vec<f64>,
    tol: f64,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[(row, col)];
        let cols = self.t.ncols();
        for c in 0..cols {
            self.t[(row, c)] /= p;
        }
        for r in 0..self.t.nrows() {
            if r != row {
                let f = self.t[(r, col)];
                if f != 0.0 {
                    for c in 0..cols {
                        let v = self.t[(row, c)];
                        self.t[(r, c)] -= f * v;
                    }
                }
            }
        }
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut rc = cost[j];
        for (i, &bv) in self.basis.iter().enumerate() {
            rc -= cost[bv] * self.t[(i, j)];
        }
        rc
    }

    /// Runs Bland-rule iterations for `cost` over the variables allowed to
    /// enter. Returns pivots taken.
    fn optimize(&mut self, cost: &[f64], may_enter: &dyn Fn(usize) -> bool, limit: usize) -> Result<usize> {
        let nvar = self.t.ncols();
        let mut pivots = 0;
        loop {
            let mut entering = None;
            for j in 0..nvar {
                if self.status[j] == Status::Basic || !may_enter(j) {
                    continue;
                }
                let rc = self.reduced_cost(cost, j);
                let scale = 1.0 + cost[j].abs();
                if (self.status[j] == Status::AtLower && rc < -self.tol * scale)
                    || (self.status[j] == Status::AtUpper && rc > self.tol * scale)
                {
                    entering = Some(j);
                    break;
                }
            }
            let j = match entering {
                Some(j) => j,
                None => return Ok(pivots),
            };
            if pivots == limit {
                return Err(Error::IterationLimit {
                    solver: "dense simplex",
                    iterations: pivots,
                });
            }
            pivots += 1;
            let dir = if self.status[j] == Status::AtLower { 1.0 } else { -1.0 };

            // ratio test; ties go to the lowest variable index
            let mut theta = self.upper[j];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_var = usize::MAX;
            for i in 0..self.basis.len() {
                let alpha = self.t[(i, j)] * dir;
                let bv = self.basis[i];
                let (limit_i, to_upper) = if alpha > self.tol {
                    (self.beta[i] / alpha, false)
                } else if alpha < -self.tol {
                    ((self.upper[bv] - self.beta[i]) / -alpha, true)
                } else {
                    continue;
                };
                let limit_i = limit_i.max(0.0);
                if limit_i < theta || (limit_i == theta && leave.is_some() && bv < leave_var) {
                    theta = limit_i;
                    leave = Some((i, to_upper));
                    leave_var = bv;
                }
            }
            if !theta.is_finite() {
                return Err(Error::Degenerate("linear program is unbounded".into()));
            }
            for i in 0..self.basis.len() {
                self.beta[i] -= theta * dir * self.t[(i, j)];
            }
            match leave {
                None => {
                    self.status[j] = if dir > 0.0 { Status::AtUpper } else { Status::AtLower };
                    self.value[j] = if dir > 0.0 { self.upper[j] } else { 0.0 };
                }
                Some((row, to_upper)) => {
                    let out = self.basis[row];
                    self.status[out] = if to_upper { Status::AtUpper } else { Status::AtLower };
                    self.value[out] = if to_upper { self.upper[out] } else { 0.0 };
                    let start = if dir > 0.0 { 0.0 } else { self.upper[j] };
                    self.pivot(row, j);
                    self.basis[row] = j;
                    self.status[j] = Status::Basic;
                    self.beta[row] = start + dir * theta;
                }
            }
        }
    }
}

/// `min cᵀz  s.t.  M z = h,  0 ≤ z ≤ u` (entries of `u` may be infinite).
/// `M` must have full row rank.
pub fn bounded_simplex(m: &DMatrix<f64>, h: &[f64], cost: &[f64], upper: &[f64]) -> Result<SimplexSolution> {
    let (rows, n) = m.shape();
    check_len("simplex right-hand side", rows, h.len())?;
    check_len("simplex cost", n, cost.len())?;
    check_len("simplex bounds", n, upper.len())?;
    let total = n + rows;
    let scale = m.amax().max(1.0);
    let tol = 1e-11 * scale;

    // all originals start at their lower bound; artificials absorb h
    let mut t = DMatrix::zeros(rows, total);
    let mut beta = vec![0.0; rows];
    for i in 0..rows {
        let sign = if h[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * m[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        beta[i] = sign * h[i];
    }
    let mut status = vec![Status::AtLower; total];
    for s in status.iter_mut().skip(n) {
        *s = Status::Basic;
    }
    let mut ub = upper.to_vec();
    ub.extend(core::iter::repeat_n(f64::INFINITY, rows));
    let mut tab = Tableau {
        t,
        beta,
        basis: (n..total).collect(),
        status,
        upper: ub,
        value: vec![0.0; total],
        tol,
    };
    let limit = 50 * total + 1000;

    let mut phase1 = vec![0.0; total];
    phase1[n..].iter_mut().for_each(|c| *c = 1.0);
    let mut pivots = tab.optimize(&phase1, &|_| true, limit)?;
    let infeas: f64 = tab
        .basis
        .iter()
        .zip(&tab.beta)
        .filter(|(&v, _)| v >= n)
        .map(|(_, b)| b.abs())
        .sum();
    let hscale = h.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    if infeas > 1e-9 * hscale {
        return Err(Error::Degenerate("linear program is infeasible".into()));
    }
    // drive zero-level artificials out of the basis
    for row in 0..rows {
        if tab.basis[row] >= n {
            let col = (0..n)
                .filter(|&j| tab.status[j] != Status::Basic)
                .max_by(|&a, &b| tab.t[(row, a)].abs().total_cmp(&tab.t[(row, b)].abs()));
            match col {
                Some(j) if tab.t[(row, j)].abs() > tol => {
                    let start = tab.value[j];
                    let out = tab.basis[row];
                    tab.status[out] = Status::AtLower;
                    tab.pivot(row, j);
                    tab.basis[row] = j;
                    tab.status[j] = Status::Basic;
                    tab.beta[row] = start;
                    pivots += 1;
                }
                _ => {
                    return Err(Error::RankDeficient {
                        condition: f64::INFINITY,
                    })
                }
            }
        }
    }
    for j in n..total {
        tab.upper[j] = 0.0;
        if tab.status[j] != Status::Basic {
            tab.status[j] = Status::AtLower;
        }
    }

    let mut phase2 = cost.to_vec();
    phase2.extend(core::iter::repeat_n(0.0, rows));
    pivots += tab.optimize(&phase2, &|j| j < n, limit)?;

    let mut z: Vec<f64> = tab.value[..n].to_vec();
    for (i, &bv) in tab.basis.iter().enumerate() {
        z[bv] = tab.beta[i];
    }
    let objective = z.iter().zip(cost).map(|(a, b)| a * b).sum();
    Ok(SimplexSolution {
        z,
        objective,
        basis: tab.basis,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bounded_problem() {
        // min -x - y  s.t. x + y + s = 1.5, 0 <= x, y <= 1, 0 <= s
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let sol = bounded_simplex(&m, &[1.5], &[-1.0, -1.0, 0.0], &[1.0, 1.0, f64::INFINITY]).unwrap();
        assert!((sol.objective + 1.5).abs() < 1e-12);
        assert!((sol.z[0] + sol.z[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasibility() {
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(bounded_simplex(&m, &[3.0], &[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn negative_right_hand_side() {
        // min x  s.t. -x + y = -2, 0 <= x, y <= 5
        let m = DMatrix::from_row_slice(1, 2, &[-1.0, 1.0]);
        let sol = bounded_simplex(&m, &[-2.0], &[1.0, 0.0], &[5.0, 5.0]).unwrap();
        assert!((sol.z[0] - 2.0).abs() < 1e-12 && sol.z[1].abs() < 1e-12);
    }
}
