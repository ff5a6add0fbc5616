use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// Clamped knot vector over `[lo, hi]` with `breakpoints` equally spaced
/// distinct knots (both ends included), each end repeated `degree` extra
/// times.
pub fn clamped_knots(lo: f64, hi: f64, breakpoints: usize, degree: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(breakpoints + 2 * degree);
    t.extend(core::iter::repeat_n(lo, degree));
    let span = hi - lo;
    for j in 0..breakpoints {
        let v = if j + 1 == breakpoints {
            hi
        } else {
            lo + span * (j as f64) / ((breakpoints - 1) as f64)
        };
        t.push(v);
    }
    t.extend(core::iter::repeat_n(hi, degree));
    t
}

/// Number of basis functions for `breakpoints` distinct knots.
pub fn basis_size(breakpoints: usize, degree: usize) -> usize {
    breakpoints + degree - 1
}

/// B-spline design matrix: row `i` holds the `breakpoints + degree − 1`
/// basis functions evaluated at `u[i]`, on equally spaced knots spanning
/// `[min u, max u]`.
pub fn bspline_basis(u: &[f64], breakpoints: usize, degree: usize) -> Result<DMatrix<f64>> {
    if !(1..=5).contains(&degree) {
        return Err(invalid(alloc::format!("spline degree {degree} outside 1..=5")));
    }
    if breakpoints < degree + 1 {
        return Err(invalid(alloc::format!(
            "need at least degree + 1 = {} knots, got {breakpoints}",
            degree + 1
        )));
    }
    if u.is_empty() || u.iter().any(|v| !v.is_finite()) {
        return Err(invalid("sample points must be finite and nonempty"));
    }
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(invalid("sample points span a degenerate range"));
    }
    let t = clamped_knots(lo, hi, breakpoints, degree);
    let d = basis_size(breakpoints, degree);
    let mut out = DMatrix::zeros(u.len(), d);
    let mut vals = vec![0.0; degree + 1];
    for (i, &x) in u.iter().enumerate() {
        let span = find_span(&t, d, degree, x);
        basis_funs(&t, span, degree, x, &mut vals);
        for (k, &v) in vals.iter().enumerate() {
            out[(i, span - degree + k)] = v;
        }
    }
    Ok(out)
}

/// Index `μ` with `t[μ] ≤ x < t[μ+1]`, clamped to the last nonempty span.
fn find_span(t: &[f64], d: usize, degree: usize, x: f64) -> usize {
    if x >= t[d] {
        return d - 1;
    }
    // binary search in [degree, d)
    let (mut lo, mut hi) = (degree, d);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x < t[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// The `degree + 1` nonzero basis values on span `μ` by the triangular
/// de Boor recurrence.
fn basis_funs(t: &[f64], span: usize, degree: usize, x: f64, out: &mut [f64]) {
    let mut left = [0.0f64; 6];
    let mut right = [0.0f64; 6];
    out[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let tmp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out[j] = saved;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    /// Textbook Cox–de Boor recursion, right end closed on the last span.
    fn cox_de_boor(t: &[f64], i: usize, p: usize, x: f64, last: usize) -> f64 {
        if p == 0 {
            let inside = t[i] <= x && x < t[i + 1];
            let right_end = i == last && x == t[i + 1];
            return if inside || right_end { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let den1 = t[i + p] - t[i];
        if den1 > 0.0 {
            v += (x - t[i]) / den1 * cox_de_boor(t, i, p - 1, x, last);
        }
        let den2 = t[i + p + 1] - t[i + 1];
        if den2 > 0.0 {
            v += (t[i + p + 1] - x) / den2 * cox_de_boor(t, i + 1, p - 1, x, last);
        }
        v
    }

    #[test]
    fn partition_of_unity_and_support() {
        let mut rng = rng_from_seed(3);
        let u: Vec<f64> = (0..200).map(|_| rng.random::<f64>() * 4.0 - 1.0).collect();
        for degree in [2, 3] {
            let a = bspline_basis(&u, 12, degree).unwrap();
            assert_eq!(a.ncols(), 12 + degree - 1);
            for i in 0..a.nrows() {
                let s: f64 = a.row(i).iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!(a.row(i).iter().all(|&v| v >= 0.0));
                assert!(a.row(i).iter().filter(|&&v| v != 0.0).count() <= degree + 1);
            }
        }
    }

    #[test]
    fn interior_point_has_full_support() {
        // knots at 0, 0.25, 0.5, 0.75, 1; 0.6 sits strictly inside a span
        let u = [0.0, 0.6, 1.0];
        let a = bspline_basis(&u, 5, 3).unwrap();
        assert_eq!(a.row(1).iter().filter(|&&v| v != 0.0).count(), 4);
    }

    #[test]
    fn matches_recursive_definition() {
        let mut rng = rng_from_seed(4);
        let mut u: Vec<f64> = (0..100).map(|_| rng.random::<f64>() * 10.0).collect();
        u.push(0.0);
        u.push(10.0);
        let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for degree in [2, 3] {
            let a = bspline_basis(&u, 9, degree).unwrap();
            let t = clamped_knots(lo, hi, 9, degree);
            let d = basis_size(9, degree);
            // the last nonempty degree-0 span
            let last = (0..t.len() - 1).rev().find(|&i| t[i] < t[i + 1]).unwrap();
            for (r, &x) in u.iter().enumerate() {
                for j in 0..d {
                    let expect = cox_de_boor(&t, j, degree, x, last);
                    assert!((a[(r, j)] - expect).abs() < 1e-12, "x={x} j={j}");
                }
            }
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(bspline_basis(&[1.0, 1.0], 5, 3).is_err());
        assert!(bspline_basis(&[0.0, 1.0], 3, 3).is_err());
        assert!(bspline_basis(&[0.0, f64::NAN], 5, 3).is_err());
        assert!(bspline_basis(&[0.0, 1.0], 5, 0).is_err());
    }
}
