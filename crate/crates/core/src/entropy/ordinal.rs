//! Permutation entropy over ordinal patterns.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::shannon_from_counts;

/// Permutation entropy: Shannon entropy (natural log) of the ordinal-pattern
/// distribution of length-`m`, delay-`d` embedded vectors. Ties are broken by
/// the earlier index, so the pattern map is total and deterministic.
///
/// The value lies in [0, ln(m!)]; a strictly monotone series yields 0.
pub fn permutation_entropy(y: &[f64], m: usize, d: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::EntropyParams("embedding dimension must be >= 1".into()));
    }
    if d < 1 {
        return Err(Error::EntropyParams("time delay must be >= 1".into()));
    }
    let n = y.len();
    let min = (m - 1) * d + 2;
    if n < min {
        return Err(Error::SeriesTooShort { len: n, min });
    }

    let n_vectors = n - (m - 1) * d;
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for i in 0..n_vectors {
        counts
            .entry(ordinal_pattern_id(y, i, m, d))
            .and_modify(|c| *c += 1)
            .or_insert(1);
    }
    Ok(shannon_from_counts(counts.into_values(), n_vectors as u64))
}

/// Lehmer-style pattern id: for each element, count how many elements rank
/// below it. "Below" means smaller value, or equal value at an earlier index,
/// which implements earlier-index-wins tie-breaking.
fn ordinal_pattern_id(y: &[f64], start: usize, m: usize, d: usize) -> u64 {
    let mut id: u64 = 0;
    for k in 0..m {
        let vk = y[start + k * d];
        let mut rank: u64 = 0;
        for l in 0..m {
            if l == k {
                continue;
            }
            let vl = y[start + l * d];
            if vl < vk || (vl == vk && l < k) {
                rank += 1;
            }
        }
        id = id * m as u64 + rank;
    }
    id
}
