//! Seven-level Daubechies-4 discrete wavelet transform with periodic
//! boundary handling.
//!
//! The input is truncated to a multiple of 2^7 so every level halves an even
//! length; with orthonormal filters and circular convolution the transform
//! then conserves energy exactly. At a 1000 Hz sampling rate the retained
//! bands cover roughly: cA7 0-3.9 Hz, cD7 3.9-7.8 Hz, cD6 7.8-15.6 Hz,
//! cD5 15.6-31.2 Hz, cD4 31.2-62.5 Hz.

use crate::error::{Error, Result};

use super::names::SubBand;

pub const LEVELS: usize = 7;
pub const MIN_LEN: usize = 1 << LEVELS;

/// Daubechies-4 scaling (low-pass reconstruction) filter; sums to sqrt(2),
/// squares sum to 1.
const DB4_LO: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

/// Full seven-level decomposition. `details[l-1]` holds cD_l; `approx` is
/// cA7. All bands are kept so the transform stays orthonormal end to end;
/// the feature bank consumes only the five retained bands.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    approx: Vec<f64>,
    details: Vec<Vec<f64>>,
    analyzed_len: usize,
}

impl WaveletDecomposition {
    /// Number of input samples actually analyzed (truncated to a multiple
    /// of 2^7).
    pub fn analyzed_len(&self) -> usize {
        self.analyzed_len
    }

    pub fn band(&self, sb: SubBand) -> &[f64] {
        match sb {
            SubBand::CA7 => &self.approx,
            SubBand::CD7 => &self.details[6],
            SubBand::CD6 => &self.details[5],
            SubBand::CD5 => &self.details[4],
            SubBand::CD4 => &self.details[3],
        }
    }

    /// The retained sub-bands in canonical order.
    pub fn retained(&self) -> impl Iterator<Item = (SubBand, &[f64])> {
        SubBand::ALL.into_iter().map(move |sb| (sb, self.band(sb)))
    }

    /// Energy summed over every coefficient of the full transform.
    pub fn total_energy(&self) -> f64 {
        let detail: f64 = self
            .details
            .iter()
            .flat_map(|d| d.iter())
            .map(|c| c * c)
            .sum();
        detail + self.approx.iter().map(|c| c * c).sum::<f64>()
    }
}

fn analysis_step(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    debug_assert!(n % 2 == 0);
    let half = n / 2;
    let taps = DB4_LO.len();
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (i, &g) in DB4_LO.iter().enumerate() {
            let idx = (2 * k + i) % n;
            a += g * x[idx];
            // Quadrature mirror: h[i] = (-1)^i * g[taps-1-i].
            let h = if i % 2 == 0 {
                DB4_LO[taps - 1 - i]
            } else {
                -DB4_LO[taps - 1 - i]
            };
            d += h * x[idx];
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

/// Decompose `y` into {cA7, cD7..cD1}. Requires at least 2^7 samples; any
/// remainder beyond the largest multiple of 2^7 is ignored.
pub fn dwt_decompose(y: &[f64]) -> Result<WaveletDecomposition> {
    if y.len() < MIN_LEN {
        return Err(Error::SeriesTooShort {
            len: y.len(),
            min: MIN_LEN,
        });
    }
    let analyzed_len = (y.len() / MIN_LEN) * MIN_LEN;
    let mut current = y[..analyzed_len].to_vec();
    let mut details = Vec::with_capacity(LEVELS);
    for _ in 0..LEVELS {
        let (approx, detail) = analysis_step(&current);
        details.push(detail);
        current = approx;
    }
    Ok(WaveletDecomposition {
        approx: current,
        details,
        analyzed_len,
    })
}
