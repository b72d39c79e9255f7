//! Channel ranking by salient-feature counts or per-channel AUC, and the
//! add-one-channel-at-a-time evaluation curve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::learn::{loso_cv, ClassifierSpec, EvalResult, ForestParams};
use crate::seeding;
use crate::signal::Label;

use super::stats::mann_whitney_p;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMethod {
    PValue,
    Auc,
}

/// Channels with their ranking score, sorted non-increasing. Ties keep the
/// matrix channel order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRanking {
    pub method: ChannelMethod,
    pub entries: Vec<(String, f64)>,
}

impl ChannelRanking {
    pub fn top(&self, k: usize) -> Vec<String> {
        self.entries.iter().take(k).map(|(c, _)| c.clone()).collect()
    }
}

/// Per-channel count of features whose two-sample Mann-Whitney test between
/// the classes yields p < alpha. Constant features count p = 1.
pub fn salient_feature_counts(x: &FeatureMatrix, alpha: f64) -> Result<Vec<(String, usize)>> {
    if !(alpha >= 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument("alpha must lie in [0, 1)".into()));
    }
    let labels = x.labels();
    let has_both = labels.iter().any(|l| *l == Label::Mw) && labels.iter().any(|l| *l == Label::NonMw);
    if !has_both {
        return Err(Error::SingleClass);
    }
    let channels = x.channels()?;
    let mut counts: Vec<(String, usize)> = channels.into_iter().map(|c| (c, 0)).collect();
    for col in 0..x.n_cols() {
        let channel = x.column_channel(col)?;
        let values = x.column(col);
        let mw: Vec<f64> = values
            .iter()
            .zip(labels)
            .filter(|(_, l)| **l == Label::Mw)
            .map(|(v, _)| *v)
            .collect();
        let non: Vec<f64> = values
            .iter()
            .zip(labels)
            .filter(|(_, l)| **l == Label::NonMw)
            .map(|(v, _)| *v)
            .collect();
        if mann_whitney_p(&mw, &non) < alpha {
            counts
                .iter_mut()
                .find(|(c, _)| *c == channel)
                .expect("channel seen in header")
                .1 += 1;
        }
    }
    Ok(counts)
}

/// Rank channels by salient-feature count (`PValue`, alpha = 0.05) or by
/// per-channel random-forest AUC under leave-one-subject-out evaluation.
pub fn rank_channels(
    x: &FeatureMatrix,
    method: ChannelMethod,
    forest: &ForestParams,
    seed: u64,
) -> Result<ChannelRanking> {
    let scored: Vec<(String, f64)> = match method {
        ChannelMethod::PValue => salient_feature_counts(x, 0.05)?
            .into_iter()
            .map(|(c, n)| (c, n as f64))
            .collect(),
        ChannelMethod::Auc => {
            let channels = x.channels()?;
            let spec = ClassifierSpec::RandomForest(*forest);
            let mut scored = Vec::with_capacity(channels.len());
            for (ci, channel) in channels.iter().enumerate() {
                let sub = x.select_channels(std::slice::from_ref(channel))?;
                let eval = loso_cv(&sub, &spec, seeding::derive(seed, &[ci as u64]))?;
                scored.push((channel.clone(), eval.auc));
            }
            scored
        }
    };
    let mut entries = scored;
    // Stable sort keeps channel order on ties.
    entries.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ChannelRanking { method, entries })
}

/// Leave-one-subject-out evaluation on the top-K channels for K = 1..=k_max.
pub fn channel_curve(
    x: &FeatureMatrix,
    ranking: &ChannelRanking,
    k_max: usize,
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<Vec<(usize, EvalResult)>> {
    if k_max == 0 || k_max > ranking.entries.len() {
        return Err(Error::InvalidArgument(format!(
            "k_max {k_max} outside 1..={}",
            ranking.entries.len()
        )));
    }
    let mut curve = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let subset = x.select_channels(&ranking.top(k))?;
        curve.push((k, loso_cv(&subset, spec, seed)?));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_matrix, EntropyConfig};
    use crate::learn::MaxFeatures;
    use crate::signal::{synth_dataset, SynthSpec};

    fn matrix(separation: f64, seed: u64) -> FeatureMatrix {
        let ds = synth_dataset(&SynthSpec {
            n_subjects: 4,
            epochs_per_subject: 10,
            n_channels: 4,
            informative_channels: [1, 3].into_iter().collect(),
            separation,
            fs: 100.0,
            window_s: 2.0,
            seed,
        })
        .unwrap();
        extract_matrix(&ds, None, false, &EntropyConfig::default())
            .unwrap()
            .0
    }

    fn fast_forest() -> ForestParams {
        ForestParams {
            n_trees: 60,
            max_depth: 8,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            seed: 0,
        }
    }

    #[test]
    fn informative_channels_rank_top_two_both_methods() {
        let x = matrix(1.5, 42);
        for method in [ChannelMethod::PValue, ChannelMethod::Auc] {
            let ranking = rank_channels(&x, method, &fast_forest(), 3).unwrap();
            let top: Vec<&str> = ranking.entries[..2].iter().map(|(c, _)| c.as_str()).collect();
            assert!(
                top.contains(&"CH2") && top.contains(&"CH4"),
                "{method:?} ranked {:?}",
                ranking.entries
            );
        }
    }

    #[test]
    fn single_channel_ranking_has_length_one() {
        let x = matrix(1.0, 7).select_channels(&["CH1".to_string()]).unwrap();
        let ranking = rank_channels(&x, ChannelMethod::PValue, &fast_forest(), 1).unwrap();
        assert_eq!(ranking.entries.len(), 1);
    }

    #[test]
    fn alpha_zero_counts_nothing() {
        let x = matrix(1.0, 8);
        let counts = salient_feature_counts(&x, 0.0).unwrap();
        assert!(counts.iter().all(|(_, n)| *n == 0));
    }

    #[test]
    fn curve_has_one_entry_per_k_and_k1_matches_direct() {
        let x = matrix(1.2, 9);
        let ranking = rank_channels(&x, ChannelMethod::PValue, &fast_forest(), 5).unwrap();
        let spec = ClassifierSpec::RandomForest(fast_forest());
        let curve = channel_curve(&x, &ranking, 3, &spec, 21).unwrap();
        assert_eq!(curve.len(), 3);
        let direct = loso_cv(
            &x.select_channels(&ranking.top(1)).unwrap(),
            &spec,
            21,
        )
        .unwrap();
        assert_eq!(curve[0].1.auc, direct.auc);
        assert_eq!(curve[0].0, 1);
    }
}
