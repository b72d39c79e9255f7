//! Binary evaluation metrics: weighted F1, Cohen's kappa, and ROC AUC.

use crate::error::{Error, Result};
use crate::signal::Label;

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b || a == 0 {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// Per-class F1 scores weighted by class prevalence. A class with no true
/// and no predicted members contributes an F1 of 0.
pub fn weighted_f1(y_true: &[Label], y_pred: &[Label]) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    let n = y_true.len() as f64;
    let mut out = 0.0;
    for class in [Label::NonMw, Label::Mw] {
        let mut tp = 0.0;
        let mut fp = 0.0;
        let mut fn_ = 0.0;
        let mut present = 0.0;
        for (t, p) in y_true.iter().zip(y_pred) {
            let t_pos = *t == class;
            let p_pos = *p == class;
            if t_pos {
                present += 1.0;
            }
            match (t_pos, p_pos) {
                (true, true) => tp += 1.0,
                (false, true) => fp += 1.0,
                (true, false) => fn_ += 1.0,
                (false, false) => {}
            }
        }
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        out += (present / n) * f1;
    }
    Ok(out)
}

/// Cohen's kappa: (p0 - pe) / (1 - pe) with pe from the product of
/// marginals. When both sequences are constant and equal (pe = 1) the
/// agreement is perfect and kappa is defined as 1.
pub fn cohens_kappa(y_true: &[Label], y_pred: &[Label]) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    let n = y_true.len() as f64;
    let agree = y_true
        .iter()
        .zip(y_pred)
        .filter(|(t, p)| t == p)
        .count() as f64;
    let p0 = agree / n;
    let mut pe = 0.0;
    for class in [Label::NonMw, Label::Mw] {
        let mt = y_true.iter().filter(|t| **t == class).count() as f64 / n;
        let mp = y_pred.iter().filter(|p| **p == class).count() as f64 / n;
        pe += mt * mp;
    }
    if pe >= 1.0 {
        return Ok(1.0);
    }
    Ok((p0 - pe) / (1.0 - pe))
}

/// ROC AUC in the Mann-Whitney form, computed from midranks: the fraction of
/// (positive, negative) pairs where the positive scores higher, ties worth
/// one half. Requires both classes.
pub fn roc_auc(y_true: &[Label], scores: &[f64]) -> Result<f64> {
    check_lengths(y_true.len(), scores.len())?;
    let n_pos = y_true.iter().filter(|l| **l == Label::Mw).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Midranks over tied score runs; sum the positive ranks.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &row in &order[i..j] {
            if y_true[row] == Label::Mw {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn l(bits: &[u8]) -> Vec<Label> {
        bits.iter()
            .map(|b| if *b == 1 { Label::Mw } else { Label::NonMw })
            .collect()
    }

    /// Pair-enumeration oracle for AUC.
    fn auc_oracle(y: &[Label], s: &[f64]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, yi) in y.iter().enumerate() {
            if *yi != Label::Mw {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if *yj != Label::NonMw {
                    continue;
                }
                pairs += 1.0;
                if s[i] > s[j] {
                    wins += 1.0;
                } else if s[i] == s[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    /// Confusion-matrix oracle for weighted F1 and kappa.
    fn confusion_oracle(y_true: &[Label], y_pred: &[Label]) -> (f64, f64) {
        let mut m = [[0.0f64; 2]; 2];
        for (t, p) in y_true.iter().zip(y_pred) {
            m[t.index()][p.index()] += 1.0;
        }
        let n: f64 = m.iter().flatten().sum();
        let mut f1w = 0.0;
        for c in 0..2 {
            let tp = m[c][c];
            let pred_c = m[0][c] + m[1][c];
            let true_c = m[c][0] + m[c][1];
            let p = if pred_c > 0.0 { tp / pred_c } else { 0.0 };
            let r = if true_c > 0.0 { tp / true_c } else { 0.0 };
            let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            f1w += true_c / n * f1;
        }
        let p0 = (m[0][0] + m[1][1]) / n;
        let pe = ((m[0][0] + m[0][1]) / n) * ((m[0][0] + m[1][0]) / n)
            + ((m[1][0] + m[1][1]) / n) * ((m[0][1] + m[1][1]) / n);
        let kappa = if pe >= 1.0 { 1.0 } else { (p0 - pe) / (1.0 - pe) };
        (f1w, kappa)
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let y = l(&[1, 1, 0, 0, 1]);
        assert_eq!(weighted_f1(&y, &y).unwrap(), 1.0);
        assert_eq!(cohens_kappa(&y, &y).unwrap(), 1.0);
    }

    #[test]
    fn worked_f1_examples() {
        let f1 = weighted_f1(&l(&[1, 1, 0, 0]), &l(&[1, 0, 1, 0])).unwrap();
        assert!((f1 - 0.5).abs() < 1e-15);
        let f1 = weighted_f1(&l(&[1, 1, 1, 0]), &l(&[1, 1, 1, 1])).unwrap();
        let want = 0.75 * (6.0 / 7.0) + 0.25 * 0.0;
        assert!((f1 - want).abs() < 1e-15, "{f1} vs {want}");
    }

    #[test]
    fn worked_kappa_examples() {
        // Balanced truth, constant prediction: chance-level agreement.
        let k = cohens_kappa(&l(&[1, 1, 0, 0]), &l(&[1, 1, 1, 1])).unwrap();
        assert_eq!(k, 0.0);
        // 8 of 10 agreements with balanced marginals.
        let y_true = l(&[1, 1, 1, 1, 1, 0, 0, 0, 0, 0]);
        let y_pred = l(&[1, 1, 1, 1, 0, 1, 0, 0, 0, 0]);
        let k = cohens_kappa(&y_true, &y_pred).unwrap();
        assert!((k - 0.6).abs() < 1e-15);
    }

    #[test]
    fn kappa_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(2..40);
            let a: Vec<Label> = (0..n).map(|_| if rng.gen::<bool>() { Label::Mw } else { Label::NonMw }).collect();
            let b: Vec<Label> = (0..n).map(|_| if rng.gen::<bool>() { Label::Mw } else { Label::NonMw }).collect();
            assert_eq!(cohens_kappa(&a, &b).unwrap(), cohens_kappa(&b, &a).unwrap());
        }
    }

    #[test]
    fn worked_auc_examples() {
        let y = l(&[0, 0, 1, 1]);
        let s = [0.1, 0.4, 0.35, 0.8];
        assert!((roc_auc(&y, &s).unwrap() - 0.75).abs() < 1e-15);
        // Perfect separation and all-ties.
        assert_eq!(roc_auc(&y, &[0.0, 0.1, 0.9, 1.0]).unwrap(), 1.0);
        assert_eq!(roc_auc(&y, &[0.5, 0.5, 0.5, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: Vec<Label> = (0..50).map(|i| if i % 3 == 0 { Label::Mw } else { Label::NonMw }).collect();
        let s: Vec<f64> = (0..50).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let t: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        assert_eq!(roc_auc(&y, &s).unwrap(), roc_auc(&y, &t).unwrap());
    }

    #[test]
    fn metrics_match_oracles_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(12345);
        for _ in 0..500 {
            let n = rng.gen_range(2..=50);
            let mut y_true: Vec<Label> = (0..n)
                .map(|_| if rng.gen::<bool>() { Label::Mw } else { Label::NonMw })
                .collect();
            // Both classes for AUC.
            y_true[0] = Label::Mw;
            if n > 1 {
                y_true[1] = Label::NonMw;
            }
            let y_pred: Vec<Label> = (0..n)
                .map(|_| if rng.gen::<bool>() { Label::Mw } else { Label::NonMw })
                .collect();
            // Quantized scores so ties occur.
            let scores: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..8) as f64) / 8.0).collect();

            let (f1_want, kappa_want) = confusion_oracle(&y_true, &y_pred);
            let f1 = weighted_f1(&y_true, &y_pred).unwrap();
            let kappa = cohens_kappa(&y_true, &y_pred).unwrap();
            let auc = roc_auc(&y_true, &scores).unwrap();
            let auc_want = auc_oracle(&y_true, &scores);
            assert!((f1 - f1_want).abs() <= 1e-12);
            assert!((kappa - kappa_want).abs() <= 1e-12);
            assert!((auc - auc_want).abs() <= 1e-12);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(weighted_f1(&l(&[1]), &l(&[1, 0])).is_err());
        assert!(roc_auc(&l(&[1, 1]), &[0.5, 0.5]).is_err());
    }
}
