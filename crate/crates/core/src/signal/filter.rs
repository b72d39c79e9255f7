//! Zero-phase Butterworth band-pass filtering.
//!
//! The filter is designed as an analog Butterworth prototype, transformed to
//! a band-pass, discretized with the bilinear transform, and kept as a
//! cascade of second-order sections for numerical stability near DC. It is
//! applied forward and backward, so the effective magnitude response is
//! |H(f)|^2 and the group delay is zero.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// One second-order section with the leading denominator coefficient
/// normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = Complex64::new(self.b0, 0.0) + z_inv * (self.b1 + self.b2 * z_inv);
        let den = Complex64::new(1.0, 0.0) + z_inv * (self.a1 + self.a2 * z_inv);
        num / den
    }

    /// DC gain of the section.
    fn unit_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Steady-state DF2T state for a constant input of 1.
    fn unit_step_state(&self) -> [f64; 2] {
        let h1 = self.unit_gain();
        let z2 = self.b2 - self.a2 * h1;
        let z1 = self.b1 - self.a1 * h1 + z2;
        [z1, z2]
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Sos {
    sections: Vec<Biquad>,
}

impl Sos {
    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Single-pass complex frequency response at `f` Hz.
    pub fn response(&self, f: f64, fs: f64) -> Complex64 {
        let w = 2.0 * std::f64::consts::PI * f / fs;
        let z_inv = Complex64::new(w.cos(), -w.sin());
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    /// Single-pass magnitude response at `f` Hz. The forward-backward pass
    /// realizes the square of this value.
    pub fn magnitude(&self, f: f64, fs: f64) -> f64 {
        self.response(f, fs).norm()
    }
}

/// Butterworth band-pass design: prototype order `order` (so 2 x `order`
/// poles overall), pass band [lo_hz, hi_hz].
pub fn butter_bandpass(order: usize, lo_hz: f64, hi_hz: f64, fs: f64) -> Result<Sos> {
    if order == 0 {
        return Err(Error::InvalidArgument("filter order must be >= 1".into()));
    }
    if !(0.0 < lo_hz && lo_hz < hi_hz && hi_hz < fs / 2.0) {
        return Err(Error::BandEdges { lo: lo_hz, hi: hi_hz, fs });
    }

    // Pre-warped analog edges for the bilinear transform.
    let warp = |f: f64| 2.0 * fs * (std::f64::consts::PI * f / fs).tan();
    let w1 = warp(lo_hz);
    let w2 = warp(hi_hz);
    let bw = w2 - w1;
    let w0 = (w1 * w2).sqrt();

    // Left-half-plane prototype poles on the unit circle.
    let n = order;
    let protos: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * n) as f64
                + std::f64::consts::FRAC_PI_2;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    let two_fs = Complex64::new(2.0 * fs, 0.0);
    let bilinear = |s: Complex64| (two_fs + s) / (two_fs - s);

    // Low-pass -> band-pass doubles each pole; pair each digital pole with
    // its conjugate to form a real-coefficient section.
    let mut sections = Vec::with_capacity(n);
    fn conj_pair(z: Complex64) -> Biquad {
        Biquad {
            b0: 1.0,
            b1: 0.0,
            b2: -1.0,
            a1: -2.0 * z.re,
            a2: z.norm_sqr(),
        }
    }
    for p in &protos {
        if p.im < -1e-12 {
            continue; // covered by the conjugate prototype pole
        }
        let pb = p * Complex64::new(bw / 2.0, 0.0);
        let disc = (pb * pb - Complex64::new(w0 * w0, 0.0)).sqrt();
        let s_a = pb + disc;
        let s_b = pb - disc;
        if p.im > 1e-12 {
            sections.push(conj_pair(bilinear(s_a)));
            sections.push(conj_pair(bilinear(s_b)));
        } else {
            // Real prototype pole (odd order): s_a and s_b already pair up.
            let za = bilinear(s_a);
            let zb = bilinear(s_b);
            sections.push(Biquad {
                b0: 1.0,
                b1: 0.0,
                b2: -1.0,
                a1: -(za + zb).re,
                a2: (za * zb).re,
            });
        }
    }

    // Normalize to unit gain at the (warped) center frequency, spreading the
    // correction evenly across sections.
    let mut sos = Sos { sections };
    let f_center = fs / std::f64::consts::PI * (w0 / (2.0 * fs)).atan();
    let g = sos.magnitude(f_center, fs);
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degenerate band-pass design for [{lo_hz}, {hi_hz}] at fs={fs}"
        )));
    }
    let per_section = (1.0 / g).powf(1.0 / sos.sections.len() as f64);
    for s in &mut sos.sections {
        s.b0 *= per_section;
        s.b1 *= per_section;
        s.b2 *= per_section;
    }
    Ok(sos)
}

fn sosfilt(sos: &Sos, x: &[f64], first_input: f64) -> Vec<f64> {
    // Per-section steady states are scaled by the DC level reaching that
    // section, which minimizes start-up transients.
    let mut states: Vec<[f64; 2]> = Vec::with_capacity(sos.sections.len());
    let mut level = first_input;
    for s in &sos.sections {
        let zi = s.unit_step_state();
        states.push([zi[0] * level, zi[1] * level]);
        level *= s.unit_gain();
    }

    let mut y = x.to_vec();
    for (s, st) in sos.sections.iter().zip(states.iter_mut()) {
        for v in &mut y {
            let xin = *v;
            let out = s.b0 * xin + st[0];
            st[0] = s.b1 * xin - s.a1 * out + st[1];
            st[1] = s.b2 * xin - s.a2 * out;
            *v = out;
        }
    }
    y
}

/// Forward-backward filtering with odd-reflection edge padding.
pub fn filtfilt(sos: &Sos, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return sosfilt(sos, x, x[0]);
    }
    let padlen = (12 * (2 * sos.sections.len() + 1)).min(n - 1);

    let mut ext = Vec::with_capacity(n + 2 * padlen);
    for k in (1..=padlen).rev() {
        ext.push(2.0 * x[0] - x[k]);
    }
    ext.extend_from_slice(x);
    for k in 1..=padlen {
        ext.push(2.0 * x[n - 1] - x[n - 1 - k]);
    }

    let first = ext[0];
    let mut y = sosfilt(sos, &ext, first);
    y.reverse();
    let first_rev = y[0];
    let mut y = sosfilt(sos, &y, first_rev);
    y.reverse();
    y[padlen..padlen + n].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integer-Hz tone over a whole number of seconds, ending exactly at a
    /// zero crossing so the odd-reflection padding continues it smoothly.
    fn sine(seconds: usize, fs: f64, f: f64) -> Vec<f64> {
        let n = seconds * fs as usize + 1;
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs).sin())
            .collect()
    }

    /// Amplitude from the RMS over the middle third of the signal. The
    /// 0.1 Hz edge settles over seconds, so the ends are excluded.
    fn mid_amplitude(y: &[f64]) -> f64 {
        let third = y.len() / 3;
        let mid = &y[third..2 * third];
        let ms = mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64;
        (2.0 * ms).sqrt()
    }

    #[test]
    fn dc_is_rejected() {
        let fs = 1000.0;
        let sos = butter_bandpass(4, 0.1, 45.0, fs).unwrap();
        let x = vec![5.0; 4000];
        let y = filtfilt(&sos, &x);
        let peak = y[1000..3000].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak < 1e-3, "residual DC {peak}");
    }

    #[test]
    fn passband_tone_matches_designed_response() {
        let fs = 1000.0;
        let sos = butter_bandpass(4, 0.1, 45.0, fs).unwrap();
        let x = sine(30, fs, 10.0);
        let y = filtfilt(&sos, &x);
        let measured = mid_amplitude(&y);
        // Forward-backward squares the single-pass magnitude.
        let predicted = sos.magnitude(10.0, fs).powi(2);
        assert!((measured - predicted).abs() < 0.01, "{measured} vs {predicted}");
        assert!((measured - 1.0).abs() < 0.05, "pass-band amplitude {measured}");
    }

    #[test]
    fn stopband_tone_matches_designed_response() {
        let fs = 1000.0;
        let sos = butter_bandpass(4, 0.1, 45.0, fs).unwrap();
        let x = sine(30, fs, 60.0);
        let y = filtfilt(&sos, &x);
        let measured = mid_amplitude(&y);
        let predicted = sos.magnitude(60.0, fs).powi(2);
        let db = 20.0 * measured.log10();
        assert!(db <= -20.0, "attenuation only {db} dB");
        assert!(
            (measured - predicted).abs() < 0.1 * predicted,
            "{measured} vs {predicted}"
        );
    }

    #[test]
    fn filtering_is_linear() {
        let fs = 250.0;
        let sos = butter_bandpass(4, 0.5, 40.0, fs).unwrap();
        let x = sine(1500, fs, 7.0);
        let z = sine(1500, fs, 21.0);
        let combo: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 2.5 * a - 1.25 * b).collect();
        let fx = filtfilt(&sos, &x);
        let fz = filtfilt(&sos, &z);
        let fc = filtfilt(&sos, &combo);
        let scale = fc.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-30);
        for i in 0..fc.len() {
            let lin = 2.5 * fx[i] - 1.25 * fz[i];
            assert!(
                (fc[i] - lin).abs() / scale < 1e-9,
                "nonlinearity at {i}: {} vs {}",
                fc[i],
                lin
            );
        }
    }

    #[test]
    fn invalid_edges_are_rejected() {
        assert!(butter_bandpass(4, 0.0, 45.0, 1000.0).is_err());
        assert!(butter_bandpass(4, 45.0, 0.1, 1000.0).is_err());
        assert!(butter_bandpass(4, 0.1, 500.0, 1000.0).is_err());
    }
}
