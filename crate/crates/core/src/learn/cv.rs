//! Leave-one-subject-out cross-validation and random hyperparameter search.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::seeding;
use crate::signal::Label;

use super::baseline::{fit_classifier, ClassifierSpec};
use super::forest::{ForestParams, MaxFeatures};
use super::metrics::{cohens_kappa, roc_auc, weighted_f1};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub subject_id: String,
    pub n_test: usize,
    pub weighted_f1: f64,
    pub kappa: f64,
    /// Undefined when the held-out subject has a single class.
    pub auc: Option<f64>,
    pub train_seconds: f64,
}

/// Pooled out-of-fold metrics with the per-fold breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub weighted_f1: f64,
    pub kappa: f64,
    pub auc: f64,
    pub folds: Vec<FoldResult>,
    /// Out-of-fold P(Mw) per row, in matrix row order.
    pub pooled_scores: Vec<f64>,
    pub pooled_predictions: Vec<Label>,
}

impl EvalResult {
    pub fn total_train_seconds(&self) -> f64 {
        self.folds.iter().map(|f| f.train_seconds).sum()
    }
}

fn predict_label(p_mw: f64) -> Label {
    // Argmax with ties to class 0.
    if p_mw > 0.5 {
        Label::Mw
    } else {
        Label::NonMw
    }
}

fn split_rows(x: &FeatureMatrix, rows: &[usize]) -> FeatureMatrix {
    let data: Vec<Vec<f64>> = rows.iter().map(|&r| x.row(r).to_vec()).collect();
    let labels: Vec<Label> = rows.iter().map(|&r| x.labels()[r]).collect();
    let subjects: Vec<String> = rows.iter().map(|&r| x.subject_ids()[r].clone()).collect();
    FeatureMatrix::from_rows(x.names().to_vec(), data, labels, subjects)
        .expect("row split preserves shape")
}

/// One fold per subject: train on every other subject's epochs, evaluate on
/// the held-out subject, and pool the out-of-fold predictions. Per-fold
/// seeds derive from `seed` by fold index, so results do not depend on
/// scheduling.
pub fn loso_cv(x: &FeatureMatrix, spec: &ClassifierSpec, seed: u64) -> Result<EvalResult> {
    let groups = x.subject_groups();
    if groups.len() < 2 {
        return Err(Error::InvalidArgument(
            "leave-one-subject-out needs at least 2 subjects".into(),
        ));
    }
    let mut pooled_scores = vec![0.0f64; x.n_rows()];
    let mut folds = Vec::with_capacity(groups.len());
    for (fold_idx, (subject_id, test_rows)) in groups.iter().enumerate() {
        let train_rows: Vec<usize> = groups
            .iter()
            .filter(|(id, _)| id != subject_id)
            .flat_map(|(_, rows)| rows.iter().copied())
            .collect();
        debug_assert!(test_rows.iter().all(|r| !train_rows.contains(r)));
        let train = split_rows(x, &train_rows);
        let test = split_rows(x, test_rows);

        let fold_seed = seeding::derive(seed, &[fold_idx as u64]);
        let t0 = Instant::now();
        let model = fit_classifier(spec, &train, fold_seed)?;
        let train_seconds = t0.elapsed().as_secs_f64();

        let proba = model.predict_proba(&test)?;
        let scores: Vec<f64> = proba.iter().map(|p| p[1]).collect();
        let preds: Vec<Label> = scores.iter().map(|&s| predict_label(s)).collect();
        for (&row, &score) in test_rows.iter().zip(&scores) {
            pooled_scores[row] = score;
        }
        let truth = test.labels();
        folds.push(FoldResult {
            subject_id: subject_id.clone(),
            n_test: test_rows.len(),
            weighted_f1: weighted_f1(truth, &preds)?,
            kappa: cohens_kappa(truth, &preds)?,
            auc: roc_auc(truth, &scores).ok(),
            train_seconds,
        });
    }

    let pooled_predictions: Vec<Label> = pooled_scores.iter().map(|&s| predict_label(s)).collect();
    let truth = x.labels();
    Ok(EvalResult {
        weighted_f1: weighted_f1(truth, &pooled_predictions)?,
        kappa: cohens_kappa(truth, &pooled_predictions)?,
        auc: roc_auc(truth, &pooled_scores)?,
        folds,
        pooled_scores,
        pooled_predictions,
    })
}

/// Forest hyperparameter pools sampled uniformly by the random search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub max_features: Vec<MaxFeatures>,
    pub min_samples_leaf: Vec<usize>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            n_trees: vec![100, 200, 300, 500, 700, 1000],
            max_depth: vec![4, 6, 8, 10, 12, 16],
            max_features: vec![MaxFeatures::Sqrt],
            min_samples_leaf: vec![1, 2, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub params: ForestParams,
    pub mean_auc: f64,
    pub skipped_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: ForestParams,
    pub candidates: Vec<CandidateResult>,
}

/// Random search over `space`: `n_candidates` parameter sets scored by mean
/// AUC across subject-grouped folds (subjects assigned round-robin).
/// Degenerate folds score 0 and are counted. Ties keep the earlier
/// candidate.
pub fn random_search(
    space: &SearchSpace,
    x: &FeatureMatrix,
    n_candidates: usize,
    n_folds: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    if n_candidates < 1 {
        return Err(Error::InvalidArgument("need at least 1 candidate".into()));
    }
    if n_folds < 2 {
        return Err(Error::InvalidArgument("need at least 2 folds".into()));
    }
    if space.n_trees.is_empty()
        || space.max_depth.is_empty()
        || space.max_features.is_empty()
        || space.min_samples_leaf.is_empty()
    {
        return Err(Error::InvalidArgument("empty search space".into()));
    }
    let groups = x.subject_groups();
    if groups.len() < n_folds {
        return Err(Error::InvalidArgument(format!(
            "{} subjects cannot fill {} grouped folds",
            groups.len(),
            n_folds
        )));
    }
    // Round-robin subject-to-fold assignment.
    let fold_rows: Vec<Vec<usize>> = (0..n_folds)
        .map(|f| {
            groups
                .iter()
                .enumerate()
                .filter(|(gi, _)| gi % n_folds == f)
                .flat_map(|(_, (_, rows))| rows.iter().copied())
                .collect()
        })
        .collect();

    let mut candidates = Vec::with_capacity(n_candidates);
    let mut best: Option<(usize, f64)> = None;
    for ci in 0..n_candidates {
        let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[0xC0DE, ci as u64]));
        let params = ForestParams {
            n_trees: *space.n_trees.choose(&mut rng).unwrap(),
            max_depth: *space.max_depth.choose(&mut rng).unwrap(),
            max_features: *space.max_features.choose(&mut rng).unwrap(),
            min_samples_leaf: *space.min_samples_leaf.choose(&mut rng).unwrap(),
            seed: 0,
        };
        let mut auc_sum = 0.0;
        let mut skipped = 0usize;
        for (fi, test_rows) in fold_rows.iter().enumerate() {
            let train_rows: Vec<usize> = fold_rows
                .iter()
                .enumerate()
                .filter(|(other, _)| *other != fi)
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect();
            let train = split_rows(x, &train_rows);
            let test = split_rows(x, test_rows);
            let single_class = |m: &FeatureMatrix| {
                m.labels().iter().all(|l| *l == Label::Mw)
                    || m.labels().iter().all(|l| *l == Label::NonMw)
            };
            if test_rows.is_empty() || single_class(&train) || single_class(&test) {
                skipped += 1; // penalty: contributes 0 to the mean
                continue;
            }
            let fold_seed = seeding::derive(seed, &[ci as u64, fi as u64]);
            let spec = ClassifierSpec::RandomForest(params);
            let model = fit_classifier(&spec, &train, fold_seed)?;
            let scores: Vec<f64> = model.predict_proba(&test)?.iter().map(|p| p[1]).collect();
            auc_sum += roc_auc(test.labels(), &scores)?;
        }
        let mean_auc = auc_sum / n_folds as f64;
        if best.map_or(true, |(_, b)| mean_auc > b) {
            best = Some((ci, mean_auc));
        }
        candidates.push(CandidateResult {
            params,
            mean_auc,
            skipped_folds: skipped,
        });
    }
    let (best_idx, _) = best.unwrap();
    Ok(SearchOutcome {
        best: candidates[best_idx].params,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Multi-subject dataset with controllable separation along feature 0.
    fn grouped_data(n_subjects: usize, per_subject: usize, gap: f64, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut subjects = Vec::new();
        for s in 0..n_subjects {
            for e in 0..per_subject {
                let mw = e % 2 == 0;
                let center = if mw { gap / 2.0 } else { -gap / 2.0 };
                rows.push(vec![
                    center + rng.sample::<f64, _>(rand_distr::StandardNormal),
                    rng.gen::<f64>(),
                ]);
                labels.push(if mw { Label::Mw } else { Label::NonMw });
                subjects.push(format!("s{s}"));
            }
        }
        let names = vec!["CH1_Mean".to_string(), "CH1_MeanPower".to_string()];
        FeatureMatrix::from_rows(names, rows, labels, subjects).unwrap()
    }

    fn rf_spec(n_trees: usize) -> ClassifierSpec {
        ClassifierSpec::RandomForest(ForestParams {
            n_trees,
            max_depth: 6,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            seed: 0,
        })
    }

    #[test]
    fn fold_count_and_partition() {
        let x = grouped_data(3, 8, 4.0, 1);
        let res = loso_cv(&x, &rf_spec(30), 7).unwrap();
        assert_eq!(res.folds.len(), 3);
        let tested: usize = res.folds.iter().map(|f| f.n_test).sum();
        assert_eq!(tested, x.n_rows());
    }

    #[test]
    fn separable_data_scores_high() {
        let x = grouped_data(5, 12, 5.0, 2);
        let res = loso_cv(&x, &rf_spec(60), 5).unwrap();
        assert!(res.auc >= 0.9, "AUC = {}", res.auc);
    }

    #[test]
    fn label_permutation_is_chance_level() {
        let mut aucs = Vec::new();
        for rep in 0..10u64 {
            let x = grouped_data(6, 10, 4.0, 100 + rep);
            // Shuffle labels within each subject.
            let mut rng = ChaCha8Rng::seed_from_u64(500 + rep);
            let mut labels = x.labels().to_vec();
            for (_, rows) in x.subject_groups() {
                let mut perm: Vec<Label> = rows.iter().map(|&r| labels[r]).collect();
                perm.shuffle(&mut rng);
                for (&r, &l) in rows.iter().zip(&perm) {
                    labels[r] = l;
                }
            }
            let shuffled = FeatureMatrix::from_rows(
                x.names().to_vec(),
                (0..x.n_rows()).map(|r| x.row(r).to_vec()).collect(),
                labels,
                x.subject_ids().to_vec(),
            )
            .unwrap();
            if let Ok(res) = loso_cv(&shuffled, &rf_spec(30), rep) {
                aucs.push(res.auc);
            }
        }
        let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
        assert!((0.40..=0.60).contains(&mean), "null AUC {mean}");
    }

    #[test]
    fn loso_is_deterministic() {
        let x = grouped_data(4, 8, 3.0, 3);
        let a = loso_cv(&x, &rf_spec(40), 11).unwrap();
        let b = loso_cv(&x, &rf_spec(40), 11).unwrap();
        assert_eq!(a.pooled_scores, b.pooled_scores);
        assert_eq!(a.auc, b.auc);
    }

    #[test]
    fn search_single_point_space_returns_it() {
        let x = grouped_data(5, 8, 3.0, 4);
        let space = SearchSpace {
            n_trees: vec![25],
            max_depth: vec![5],
            max_features: vec![MaxFeatures::Sqrt],
            min_samples_leaf: vec![2],
        };
        let out = random_search(&space, &x, 3, 2, 9).unwrap();
        assert_eq!(out.best.n_trees, 25);
        assert_eq!(out.best.max_depth, 5);
        assert_eq!(out.best.min_samples_leaf, 2);
    }

    #[test]
    fn search_is_deterministic() {
        let x = grouped_data(5, 8, 3.0, 5);
        let space = SearchSpace::default();
        let a = random_search(&space, &x, 6, 2, 17).unwrap();
        let b = random_search(&space, &x, 6, 2, 17).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.candidates, b.candidates);
    }
}
