//! Two-sample statistics used by channel ranking and feature clustering.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Two-sided Mann-Whitney U test, normal approximation with midranks, tie
/// correction, and continuity correction. A constant feature (all ties)
/// yields p = 1.
pub fn mann_whitney_p(a: &[f64], b: &[f64]) -> f64 {
    let n1 = a.len();
    let n2 = b.len();
    if n1 == 0 || n2 == 0 {
        return 1.0;
    }
    let n = n1 + n2;
    let mut values: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    values.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut rank_sum_a = 0.0f64;
    let mut tie_term = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && values[j].0 == values[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        let midrank = (i + 1 + j) as f64 / 2.0;
        for v in &values[i..j] {
            if v.1 {
                rank_sum_a += midrank;
            }
        }
        i = j;
    }

    let n1f = n1 as f64;
    let n2f = n2 as f64;
    let nf = n as f64;
    let u = rank_sum_a - n1f * (n1f + 1.0) / 2.0;
    let mean = n1f * n2f / 2.0;
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if !(var > 0.0) {
        return 1.0; // everything tied
    }
    let diff = u - mean;
    let z = (diff.abs() - 0.5).max(0.0) / var.sqrt();
    (erfc(z / std::f64::consts::SQRT_2)).clamp(0.0, 1.0)
}

/// Sample Pearson correlation. Errors on constant input; callers that
/// cluster treat that as a correlation of 0.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (x, y) in a.iter().zip(b) {
        let vx = x - ma;
        let vy = y - mb;
        num += vx * vy;
        da += vx * vx;
        db += vy * vy;
    }
    if !(da > 0.0) || !(db > 0.0) {
        return Err(Error::ZeroVariance("Pearson correlation of a constant sequence"));
    }
    Ok(num / (da * db).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pearson_of_self_and_negation() {
        let x = [1.0, 2.0, 5.0, 3.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_hand_example() {
        let got = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        // num = 3, den = sqrt(2 * 42/9)
        let want = 3.0 / (2.0f64 * 42.0 / 9.0).sqrt();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.98198).abs() < 1e-5);
    }

    #[test]
    fn pearson_rejects_constant_input() {
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn separated_samples_give_tiny_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<f64> = (0..100).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal) + 5.0).collect();
        let b: Vec<f64> = (0..100).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        assert!(mann_whitney_p(&a, &b) < 1e-6);
    }

    #[test]
    fn identical_distributions_hold_test_size() {
        // Fraction of p < 0.05 under the null is close to 0.05.
        let mut rejections = 0usize;
        let mut total = 0usize;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                let a: Vec<f64> = (0..40).map(|_| rng.gen::<f64>()).collect();
                let b: Vec<f64> = (0..40).map(|_| rng.gen::<f64>()).collect();
                if mann_whitney_p(&a, &b) < 0.05 {
                    rejections += 1;
                }
                total += 1;
            }
        }
        let rate = rejections as f64 / total as f64;
        assert!((0.03..=0.07).contains(&rate), "rejection rate {rate}");
    }

    #[test]
    fn constant_feature_gives_p_one() {
        assert_eq!(mann_whitney_p(&[2.0; 10], &[2.0; 12]), 1.0);
    }
}
