//! Welch power spectral density, spectral entropy, and wavelet log-energy
//! entropy.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// Taper applied to each Welch segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WelchWindow {
    Hann,
    Rectangular,
}

/// Welch estimator settings. The default uses 1-second segments (capped at
/// the series length), 50% overlap, and a periodic Hann window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub overlap: f64,
    pub window: WelchWindow,
}

impl WelchConfig {
    /// One-second segments at sampling rate `fs`, capped to the series length.
    pub fn one_second(fs: f64, series_len: usize) -> Self {
        let seg = (fs.round() as usize).max(2).min(series_len);
        Self {
            segment_len: seg,
            overlap: 0.5,
            window: WelchWindow::Hann,
        }
    }
}

/// One-sided Welch PSD. Returns (frequencies, density values); densities are
/// averaged over segments and normalized so that summing density x bin width
/// approximates signal power.
pub fn welch_psd(y: &[f64], fs: f64, cfg: &WelchConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = y.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n, min: 2 });
    }
    if !(fs > 0.0) {
        return Err(Error::InvalidArgument("sampling rate must be > 0".into()));
    }
    let seg = cfg.segment_len.min(n).max(2);
    let hop = ((seg as f64) * (1.0 - cfg.overlap)).round().max(1.0) as usize;

    let window: Vec<f64> = match cfg.window {
        WelchWindow::Hann => (0..seg)
            .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / seg as f64).cos()))
            .collect(),
        WelchWindow::Rectangular => vec![1.0; seg],
    };
    let win_power: f64 = window.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(seg);
    let n_bins = seg / 2 + 1;
    let mut psd = vec![0.0f64; n_bins];
    let mut buf = vec![Complex::new(0.0, 0.0); seg];
    let mut n_segments = 0usize;

    let mut start = 0usize;
    while start + seg <= n {
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(y[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, acc) in psd.iter_mut().enumerate() {
            let mag2 = buf[k].norm_sqr();
            // One-sided density: double everything except DC and Nyquist.
            let one_sided = if k == 0 || (seg % 2 == 0 && k == seg / 2) {
                mag2
            } else {
                2.0 * mag2
            };
            *acc += one_sided / (fs * win_power);
        }
        n_segments += 1;
        start += hop;
    }
    debug_assert!(n_segments > 0);
    for v in &mut psd {
        *v /= n_segments as f64;
    }
    let freqs: Vec<f64> = (0..n_bins).map(|k| k as f64 * fs / seg as f64).collect();
    Ok((freqs, psd))
}

/// Spectral entropy of the Welch PSD restricted to `band` (half-open
/// [lo, hi); `None` means the full one-sided spectrum), normalized by the
/// log of the bin count so the value lies in [0, 1].
pub fn spectral_entropy(y: &[f64], fs: f64, band: Option<(f64, f64)>) -> Result<f64> {
    spectral_entropy_with(y, fs, band, &WelchConfig::one_second(fs, y.len()))
}

/// Spectral entropy with an explicit Welch configuration.
pub fn spectral_entropy_with(
    y: &[f64],
    fs: f64,
    band: Option<(f64, f64)>,
    cfg: &WelchConfig,
) -> Result<f64> {
    if y.len() < 16 {
        return Err(Error::SeriesTooShort { len: y.len(), min: 16 });
    }
    if let Some((lo, hi)) = band {
        if !(lo < hi) || lo < 0.0 || hi > fs / 2.0 + 1e-12 {
            return Err(Error::BandEdges { lo, hi, fs });
        }
    }
    let (freqs, psd) = welch_psd(y, fs, cfg)?;
    let in_band = band_slice(&freqs, &psd, band);
    if in_band.is_empty() {
        let (lo, hi) = band.unwrap_or((0.0, fs / 2.0));
        return Err(Error::EmptyBand { lo, hi });
    }
    Ok(normalized_shannon(&in_band))
}

/// PSD values within a half-open band ([lo, hi); `None` is the whole
/// one-sided spectrum).
pub(crate) fn band_slice(freqs: &[f64], psd: &[f64], band: Option<(f64, f64)>) -> Vec<f64> {
    freqs
        .iter()
        .zip(psd)
        .filter(|(f, _)| match band {
            Some((lo, hi)) => **f >= lo && **f < hi,
            None => true,
        })
        .map(|(_, p)| *p)
        .collect()
}

/// Shannon entropy of normalized bin powers divided by ln(#bins).
pub(crate) fn normalized_shannon(bins: &[f64]) -> f64 {
    if bins.len() < 2 {
        // A single bin is a degenerate distribution.
        return 0.0;
    }
    let total: f64 = bins.iter().sum();
    if !(total > 0.0) {
        return 0.0;
    }
    let mut h = 0.0;
    for p in bins {
        let p = p / total;
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h / (bins.len() as f64).ln()
}

/// Normalized log-energy entropy of wavelet coefficients: Shannon entropy of
/// p_i = c_i^2 / sum(c_j^2), divided by ln(len). One dominant coefficient
/// gives 0; equal magnitudes give 1.
pub fn wavelet_log_energy_entropy(coeffs: &[f64]) -> Result<f64> {
    if coeffs.is_empty() {
        return Err(Error::SeriesTooShort { len: 0, min: 1 });
    }
    let total: f64 = coeffs.iter().map(|c| c * c).sum();
    if !(total > 0.0) {
        return Err(Error::AllZeroCoefficients);
    }
    if coeffs.len() == 1 {
        return Ok(0.0);
    }
    let mut h = 0.0;
    for c in coeffs {
        let p = c * c / total;
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    Ok(h / (coeffs.len() as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sine(n: usize, fs: f64, f: f64, amp: f64, phase: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * f * i as f64 / fs + phase).sin())
            .collect()
    }

    #[test]
    fn on_bin_sinusoid_has_zero_entropy() {
        // 8 Hz at fs = 64 with a 64-sample rectangular segment sits exactly
        // on bin 8.
        let fs = 64.0;
        let y = sine(64, fs, 8.0, 1.0, 0.3);
        let cfg = WelchConfig {
            segment_len: 64,
            overlap: 0.0,
            window: WelchWindow::Rectangular,
        };
        let h = spectral_entropy_with(&y, fs, None, &cfg).unwrap();
        assert!(h.abs() < 1e-9, "h = {h}");
    }

    #[test]
    fn two_equal_bins_give_ln2_over_ln_bins() {
        let fs = 64.0;
        let n = 64;
        let mut y = sine(n, fs, 8.0, 1.0, 0.0);
        let z = sine(n, fs, 19.0, 1.0, 0.0);
        for (a, b) in y.iter_mut().zip(z) {
            *a += b;
        }
        let cfg = WelchConfig {
            segment_len: 64,
            overlap: 0.0,
            window: WelchWindow::Rectangular,
        };
        let h = spectral_entropy_with(&y, fs, None, &cfg).unwrap();
        let bins = (64 / 2 + 1) as f64;
        let want = 2.0f64.ln() / bins.ln();
        assert!((h - want).abs() < 1e-9, "h = {h}, want = {want}");
    }

    #[test]
    fn white_noise_entropy_is_near_one() {
        let fs = 256.0;
        let mut acc = 0.0;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<f64> = (0..8192).map(|_| rng.gen::<f64>() - 0.5).collect();
            acc += spectral_entropy(&y, fs, None).unwrap();
        }
        let mean = acc / 20.0;
        assert!(mean >= 0.95, "mean spectral entropy {mean}");
    }

    #[test]
    fn band_restriction_rejects_empty_band() {
        let y = sine(256, 128.0, 10.0, 1.0, 0.0);
        // Band narrower than one bin spacing placed between bins.
        let err = spectral_entropy(&y, 128.0, Some((10.3, 10.4))).unwrap_err();
        assert!(matches!(err, Error::EmptyBand { .. }));
    }

    #[test]
    fn wavelet_entropy_degenerate_and_uniform() {
        assert_eq!(wavelet_log_energy_entropy(&[0.0, 5.0, 0.0, 0.0]).unwrap(), 0.0);
        let h = wavelet_log_energy_entropy(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
        assert!(wavelet_log_energy_entropy(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn wavelet_entropy_three_four() {
        let got = wavelet_log_energy_entropy(&[3.0, 4.0]).unwrap();
        let p1: f64 = 9.0 / 25.0;
        let p2: f64 = 16.0 / 25.0;
        let want = (-p1 * p1.ln() - p2 * p2.ln()) / 2.0f64.ln();
        assert!((got - want).abs() < 1e-12);
    }
}
