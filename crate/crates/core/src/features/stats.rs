//! Per-channel statistical features: time-domain statistics, band powers,
//! and wavelet sub-band statistics.

use crate::entropy::spectral::{band_slice, welch_psd, WelchConfig};
use crate::error::{Error, Result};

use super::dwt::WaveletDecomposition;
use super::names::{Band, SubBand};

/// Time-domain statistics of one series. Hjorth complexity is undefined for
/// zero-variance signals (and signals with a constant first difference).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStats {
    pub mean: f64,
    pub mean_power: f64,
    pub first_diff: f64,
    pub second_diff: f64,
    pub hjorth_complexity: Option<f64>,
}

fn population_sd(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mu = x.iter().sum::<f64>() / x.len() as f64;
    (x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / x.len() as f64).sqrt()
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Mean, mean power, mean absolute first and second differences, and Hjorth
/// complexity (mobility of the first difference over mobility of the
/// signal).
pub fn time_stat_features(y: &[f64]) -> Result<TimeStats> {
    if y.len() < 3 {
        return Err(Error::SeriesTooShort { len: y.len(), min: 3 });
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let mean_power = y.iter().map(|v| v * v).sum::<f64>() / n;
    let d1 = diff(y);
    let d2 = diff(&d1);
    let first_diff = d1.iter().map(|v| v.abs()).sum::<f64>() / d1.len() as f64;
    let second_diff = d2.iter().map(|v| v.abs()).sum::<f64>() / d2.len() as f64;

    let sd0 = population_sd(y);
    let sd1 = population_sd(&d1);
    let sd2 = population_sd(&d2);
    let hjorth_complexity = if sd0 > 0.0 && sd1 > 0.0 {
        // (sd2/sd1) / (sd1/sd0)
        Some(sd2 * sd0 / (sd1 * sd1))
    } else {
        None
    };
    Ok(TimeStats {
        mean,
        mean_power,
        first_diff,
        second_diff,
        hjorth_complexity,
    })
}

/// Mean Welch PSD inside each of the four bands, in log10 power. Densities
/// are floored at 1e-300 so silent channels stay finite.
pub fn band_power_features(y: &[f64], fs: f64) -> Result<[(Band, f64); 4]> {
    let min = fs.round().max(2.0) as usize;
    if y.len() < min {
        return Err(Error::SeriesTooShort { len: y.len(), min });
    }
    let (freqs, psd) = welch_psd(y, fs, &WelchConfig::one_second(fs, y.len()))?;
    band_power_from_psd(&freqs, &psd)
}

/// Band powers from a precomputed PSD (shared with the spectral entropies).
pub(crate) fn band_power_from_psd(freqs: &[f64], psd: &[f64]) -> Result<[(Band, f64); 4]> {
    let mut out = [(Band::Theta, 0.0); 4];
    for (slot, band) in out.iter_mut().zip(Band::ALL) {
        let (lo, hi) = band.range_hz();
        let bins = band_slice(freqs, psd, Some((lo, hi)));
        if bins.is_empty() {
            return Err(Error::EmptyBand { lo, hi });
        }
        let mean_density = bins.iter().sum::<f64>() / bins.len() as f64;
        *slot = (band, mean_density.max(1e-300).log10());
    }
    Ok(out)
}

/// Sub-band coefficient statistics. The ratio of absolute means (RAM) pairs
/// each band with its canonical partner and is undefined when the partner's
/// mean magnitude is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubBandStats {
    pub mean_power: f64,
    pub mean: f64,
    pub std: f64,
    pub ram: Option<f64>,
}

/// The 4 statistics for each of the 5 retained sub-bands, in canonical band
/// order.
pub fn wavelet_stat_features(w: &WaveletDecomposition) -> Vec<(SubBand, SubBandStats)> {
    let mean_abs = |sb: SubBand| -> f64 {
        let c = w.band(sb);
        c.iter().map(|v| v.abs()).sum::<f64>() / c.len() as f64
    };
    SubBand::ALL
        .into_iter()
        .map(|sb| {
            let c = w.band(sb);
            let n = c.len() as f64;
            let mean = c.iter().sum::<f64>() / n;
            let mean_power = c.iter().map(|v| v * v).sum::<f64>() / n;
            let std = population_sd(c);
            let partner = mean_abs(sb.ram_partner());
            let ram = if partner > 0.0 {
                Some(mean_abs(sb) / partner)
            } else {
                None
            };
            (sb, SubBandStats {
                mean_power,
                mean,
                std,
                ram,
            })
        })
        .collect()
}
