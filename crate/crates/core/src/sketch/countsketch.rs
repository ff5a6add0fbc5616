use alloc::vec;
use alloc::vec::Vec;

use super::hash::HashFamily;
use crate::error::{check_len, Result};

/// `out[i] = Σ_{j : h(j) = i} s(j)·v_j`, skipping zero entries of `v`.
pub fn countsketch_apply(h: &HashFamily, s: &HashFamily, v: &[f64]) -> Result<Vec<f64>> {
    check_len("countsketch sign domain", h.domain(), s.domain())?;
    check_len("countsketch input", h.domain(), v.len())?;
    let mut out = vec![0.0; h.range()];
    for (j, &vj) in v.iter().enumerate() {
        if vj != 0.0 {
            out[h.bucket_of(j)] += s.sign_of(j) * vj;
        }
    }
    Ok(out)
}
