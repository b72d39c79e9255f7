//! Dispersion entropy and its fluctuation-based variant.
//!
//! The series is mapped through the normal cumulative distribution function,
//! quantized into `c` classes, embedded with dimension `m` and delay `d`, and
//! the Shannon entropy of the resulting pattern distribution is returned.
//! The fluctuation variant replaces each pattern by the first differences of
//! its digits.

use std::collections::HashMap;

use statrs::function::erf::erf;

use crate::error::{Error, Result};

use super::{mean, population_sd, shannon_from_counts};

/// Dispersion entropy with NCDF parameters estimated from `y` itself.
/// Value lies in [0, ln(c^m)] and is invariant under y -> a*y + b, a > 0.
pub fn dispersion_entropy(y: &[f64], m: usize, c: usize, d: usize) -> Result<f64> {
    let (mu, sd) = ncdf_params(y)?;
    dispersion_entropy_with_ncdf(y, m, c, d, mu, sd)
}

/// Dispersion entropy with explicit NCDF mean and standard deviation; the
/// multiscale path estimates these once from the scale-1 series.
pub fn dispersion_entropy_with_ncdf(
    y: &[f64],
    m: usize,
    c: usize,
    d: usize,
    mu: f64,
    sd: f64,
) -> Result<f64> {
    check_params(y.len(), m, c, d, 2)?;
    let digits = dispersion_digits(y, c, mu, sd);
    let n_vectors = y.len() - (m - 1) * d;
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for i in 0..n_vectors {
        let mut id: u64 = 0;
        for k in 0..m {
            id = id * c as u64 + (digits[i + k * d] - 1) as u64;
        }
        *counts.entry(id).or_insert(0) += 1;
    }
    Ok(shannon_from_counts(counts.into_values(), n_vectors as u64))
}

/// Fluctuation-based dispersion entropy: patterns are the (m-1) adjacent
/// differences of dispersion digits, each in [-c+1, c-1]. Value lies in
/// [0, (m-1) ln(2c-1)].
pub fn fluctuation_dispersion_entropy(y: &[f64], m: usize, c: usize, d: usize) -> Result<f64> {
    let (mu, sd) = ncdf_params(y)?;
    fluctuation_dispersion_entropy_with_ncdf(y, m, c, d, mu, sd)
}

/// Fluctuation variant with explicit NCDF parameters.
pub fn fluctuation_dispersion_entropy_with_ncdf(
    y: &[f64],
    m: usize,
    c: usize,
    d: usize,
    mu: f64,
    sd: f64,
) -> Result<f64> {
    check_params(y.len(), m, c, d, 2)?;
    let digits = dispersion_digits(y, c, mu, sd);
    let n_vectors = y.len() - (m - 1) * d;
    let base = (2 * c - 1) as u64;
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for i in 0..n_vectors {
        let mut id: u64 = 0;
        for k in 1..m {
            let diff = digits[i + k * d] as i64 - digits[i + (k - 1) * d] as i64;
            id = id * base + (diff + c as i64 - 1) as u64;
        }
        *counts.entry(id).or_insert(0) += 1;
    }
    Ok(shannon_from_counts(counts.into_values(), n_vectors as u64))
}

fn ncdf_params(y: &[f64]) -> Result<(f64, f64)> {
    let sd = population_sd(y);
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance("dispersion-entropy NCDF is degenerate"));
    }
    Ok((mean(y), sd))
}

fn check_params(n: usize, m: usize, c: usize, d: usize, min_m: usize) -> Result<()> {
    if m < min_m {
        return Err(Error::EntropyParams(format!("embedding dimension must be >= {min_m}")));
    }
    if c < 2 {
        return Err(Error::EntropyParams("class count must be >= 2".into()));
    }
    if d < 1 {
        return Err(Error::EntropyParams("time delay must be >= 1".into()));
    }
    let min = (m - 1) * d + 2;
    if n < min {
        return Err(Error::SeriesTooShort { len: n, min });
    }
    Ok(())
}

/// Map each sample to a class in 1..=c: NCDF to (0, 1), then
/// round(c*y + 0.5) clamped into [1, c] against floating-point boundary spill.
fn dispersion_digits(y: &[f64], c: usize, mu: f64, sd: f64) -> Vec<u32> {
    y.iter()
        .map(|&v| {
            let z = (v - mu) / (sd * std::f64::consts::SQRT_2);
            let p = 0.5 * (1.0 + erf(z));
            let q = (c as f64 * p + 0.5).round();
            (q.max(1.0).min(c as f64)) as u32
        })
        .collect()
}
