//! Sample entropy with Richman-Moorman pair counting.

use crate::error::{Error, Result};

/// Sample entropy: -ln(A/B), where B counts ordered template pairs (i, j),
/// i < j, over the first N-m templates whose length-m windows lie within
/// Chebyshev distance < r, and A counts the same pairs for length m+1.
/// Self-matches are excluded by construction.
///
/// Returns an error carrying both counts when either count is zero.
pub fn sample_entropy(y: &[f64], m: usize, r: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::EntropyParams("embedding dimension must be >= 1".into()));
    }
    if !(r > 0.0) {
        return Err(Error::EntropyParams("tolerance must be > 0".into()));
    }
    let n = y.len();
    if n < m + 2 {
        return Err(Error::SeriesTooShort { len: n, min: m + 2 });
    }

    let n_templates = n - m;
    let mut b: u64 = 0;
    let mut a: u64 = 0;
    for i in 0..n_templates {
        for j in (i + 1)..n_templates {
            // Chebyshev distance over the length-m window, early exit.
            let mut within = true;
            for k in 0..m {
                if (y[i + k] - y[j + k]).abs() >= r {
                    within = false;
                    break;
                }
            }
            if within {
                b += 1;
                if (y[i + m] - y[j + m]).abs() < r {
                    a += 1;
                }
            }
        }
    }

    if b == 0 || a == 0 {
        return Err(Error::UndefinedEntropy {
            template_matches: b,
            extended_matches: a,
        });
    }
    Ok(-((a as f64) / (b as f64)).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: materialize every template vector and count pairs
    /// with an explicit max-norm, no early exit, no shared code path.
    fn naive_sample_entropy(y: &[f64], m: usize, r: f64) -> Option<f64> {
        let n = y.len();
        let count = |len: usize| -> u64 {
            let templates: Vec<&[f64]> = (0..n - m).map(|i| &y[i..i + len]).collect();
            let mut c = 0u64;
            for i in 0..templates.len() {
                for j in (i + 1)..templates.len() {
                    let d = templates[i]
                        .iter()
                        .zip(templates[j])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max);
                    if d < r {
                        c += 1;
                    }
                }
            }
            c
        };
        let b = count(m);
        let a = count(m + 1);
        if a == 0 || b == 0 {
            None
        } else {
            Some(-((a as f64) / (b as f64)).ln())
        }
    }

    #[test]
    fn constant_series_has_zero_entropy() {
        let y = vec![3.25; 100];
        let v = sample_entropy(&y, 2, 0.2).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn ramp_with_tight_tolerance_is_undefined() {
        let y: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let err = sample_entropy(&y, 2, 0.5).unwrap_err();
        match err {
            Error::UndefinedEntropy {
                template_matches, ..
            } => assert_eq!(template_matches, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn matches_naive_pair_counter() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let y: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
        let mu = y.iter().sum::<f64>() / y.len() as f64;
        let sd = (y.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
        let r = 0.2 * sd;
        let got = sample_entropy(&y, 2, r).unwrap();
        let want = naive_sample_entropy(&y, 2, r).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn too_short_series_is_rejected() {
        let y = [1.0, 2.0, 3.0];
        assert!(matches!(
            sample_entropy(&y, 2, 0.5),
            Err(Error::SeriesTooShort { .. })
        ));
    }
}
