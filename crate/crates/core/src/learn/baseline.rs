//! Baseline classifiers (Gaussian naive Bayes, weighted k-NN) and the
//! pluggable classifier interface used by cross-validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::signal::Label;

use super::forest::{train_random_forest, ForestParams, TrainedForest};

/// Which classifier to fit. SVM-style models can be plugged in externally
/// through [`FittedClassifier`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierSpec {
    RandomForest(ForestParams),
    NaiveBayes,
    /// k-NN with Manhattan distance and inverse-distance vote weights.
    Knn { k: usize },
}

/// A fitted binary classifier emitting [P(NonMw), P(Mw)] rows.
pub trait FittedClassifier: Send + Sync {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>>;
    /// Normalized feature importances, when the model defines them.
    fn importances(&self) -> Option<&[f64]> {
        None
    }
}

impl FittedClassifier for TrainedForest {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>> {
        TrainedForest::predict_proba(self, x)
    }

    fn importances(&self) -> Option<&[f64]> {
        Some(TrainedForest::importances(self))
    }
}

/// Fit `spec` on `x`. `seed` feeds the forest's tree sampling; the baselines
/// are deterministic without it.
pub fn fit_classifier(
    spec: &ClassifierSpec,
    x: &FeatureMatrix,
    seed: u64,
) -> Result<Box<dyn FittedClassifier>> {
    match spec {
        ClassifierSpec::RandomForest(params) => {
            let params = ForestParams { seed, ..*params };
            Ok(Box::new(train_random_forest(x, &params)?))
        }
        ClassifierSpec::NaiveBayes => Ok(Box::new(GaussianNb::fit(x)?)),
        ClassifierSpec::Knn { k } => Ok(Box::new(Knn::fit(x, *k)?)),
    }
}

fn check_trainable(x: &FeatureMatrix) -> Result<()> {
    if x.n_rows() == 0 || x.n_cols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let n_mw = x.labels().iter().filter(|l| **l == Label::Mw).count();
    if n_mw == 0 || n_mw == x.n_rows() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Column-wise standardization fitted on training data only; constant
/// columns pass through unscaled.
#[derive(Debug, Clone)]
struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    fn fit(x: &FeatureMatrix) -> Self {
        let n = x.n_rows() as f64;
        let mut mean = vec![0.0; x.n_cols()];
        let mut scale = vec![0.0; x.n_cols()];
        for c in 0..x.n_cols() {
            let col = x.column(c);
            let mu = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            mean[c] = mu;
            scale[c] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Gaussian naive Bayes over standardized features, with a variance floor of
/// 1e-9 x the largest feature variance.
pub struct GaussianNb {
    feature_names: Vec<String>,
    standardizer: Standardizer,
    log_prior: [f64; 2],
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
}

impl GaussianNb {
    pub fn fit(x: &FeatureMatrix) -> Result<Self> {
        check_trainable(x)?;
        let standardizer = Standardizer::fit(x);
        let rows: Vec<Vec<f64>> = (0..x.n_rows())
            .map(|r| standardizer.transform_row(x.row(r)))
            .collect();
        let k = x.n_cols();
        let mut mean = [vec![0.0; k], vec![0.0; k]];
        let mut var = [vec![0.0; k], vec![0.0; k]];
        let mut count = [0usize; 2];
        for (row, label) in rows.iter().zip(x.labels()) {
            let c = label.index();
            count[c] += 1;
            for (j, v) in row.iter().enumerate() {
                mean[c][j] += v;
            }
        }
        for c in 0..2 {
            for j in 0..k {
                mean[c][j] /= count[c] as f64;
            }
        }
        for (row, label) in rows.iter().zip(x.labels()) {
            let c = label.index();
            for (j, v) in row.iter().enumerate() {
                let d = v - mean[c][j];
                var[c][j] += d * d;
            }
        }
        let mut max_var = 0.0f64;
        for c in 0..2 {
            for j in 0..k {
                var[c][j] /= count[c] as f64;
                max_var = max_var.max(var[c][j]);
            }
        }
        let floor = 1e-9 * max_var.max(1e-300);
        for c in 0..2 {
            for v in &mut var[c] {
                *v = v.max(floor);
            }
        }
        let n = x.n_rows() as f64;
        Ok(Self {
            feature_names: x.names().to_vec(),
            standardizer,
            log_prior: [
                (count[0] as f64 / n).ln(),
                (count[1] as f64 / n).ln(),
            ],
            mean,
            var,
        })
    }
}

impl FittedClassifier for GaussianNb {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>> {
        if x.names() != self.feature_names.as_slice() {
            return Err(Error::FeatureMismatch {
                expected: self.feature_names.len(),
                got: x.n_cols(),
            });
        }
        Ok((0..x.n_rows())
            .map(|r| {
                let row = self.standardizer.transform_row(x.row(r));
                let mut log_like = [self.log_prior[0], self.log_prior[1]];
                for c in 0..2 {
                    for (j, v) in row.iter().enumerate() {
                        let var = self.var[c][j];
                        let d = v - self.mean[c][j];
                        log_like[c] +=
                            -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var);
                    }
                }
                let m = log_like[0].max(log_like[1]);
                let e0 = (log_like[0] - m).exp();
                let e1 = (log_like[1] - m).exp();
                let p1 = e1 / (e0 + e1);
                [1.0 - p1, p1]
            })
            .collect())
    }
}

/// k nearest neighbors, Manhattan metric, inverse-distance weights.
/// Distance ties resolve to the lower training-row index; zero-distance
/// neighbors take the whole vote.
pub struct Knn {
    feature_names: Vec<String>,
    standardizer: Standardizer,
    rows: Vec<Vec<f64>>,
    labels: Vec<Label>,
    k: usize,
}

impl Knn {
    pub fn fit(x: &FeatureMatrix, k: usize) -> Result<Self> {
        check_trainable(x)?;
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let standardizer = Standardizer::fit(x);
        let rows: Vec<Vec<f64>> = (0..x.n_rows())
            .map(|r| standardizer.transform_row(x.row(r)))
            .collect();
        Ok(Self {
            feature_names: x.names().to_vec(),
            standardizer,
            rows,
            labels: x.labels().to_vec(),
            k,
        })
    }

    fn proba_for(&self, query: &[f64], exclude: Option<usize>) -> [f64; 2] {
        let mut dists: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != exclude)
            .map(|(i, row)| {
                let d: f64 = row.iter().zip(query).map(|(a, b)| (a - b).abs()).sum();
                (d, i)
            })
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(dists.len());
        let neighbors = &dists[..k];
        let zero: Vec<&(f64, usize)> = neighbors.iter().filter(|(d, _)| *d == 0.0).collect();
        let mut votes = [0.0f64; 2];
        if !zero.is_empty() {
            for (_, i) in zero {
                votes[self.labels[*i].index()] += 1.0;
            }
        } else {
            for (d, i) in neighbors {
                votes[self.labels[*i].index()] += 1.0 / d;
            }
        }
        let total = votes[0] + votes[1];
        let p1 = votes[1] / total;
        [1.0 - p1, p1]
    }

    /// Training-set self-prediction with the queried row excluded.
    pub fn self_predict(&self) -> Vec<[f64; 2]> {
        (0..self.rows.len())
            .map(|i| self.proba_for(&self.rows[i].clone(), Some(i)))
            .collect()
    }
}

impl FittedClassifier for Knn {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>> {
        if x.names() != self.feature_names.as_slice() {
            return Err(Error::FeatureMismatch {
                expected: self.feature_names.len(),
                got: x.n_cols(),
            });
        }
        Ok((0..x.n_rows())
            .map(|r| self.proba_for(&self.standardizer.transform_row(x.row(r)), None))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Two Gaussian blobs separated along every feature.
    fn blobs(n_per_class: usize, n_features: usize, gap: f64, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2 {
            let center = if class == 0 { -gap / 2.0 } else { gap / 2.0 };
            for _ in 0..n_per_class {
                rows.push(
                    (0..n_features)
                        .map(|_| center + rng.sample::<f64, _>(rand_distr::StandardNormal))
                        .collect(),
                );
                labels.push(if class == 0 { Label::NonMw } else { Label::Mw });
            }
        }
        let names = (0..n_features).map(|i| format!("CH1_MPE-{}", i + 1)).collect();
        let subjects = vec!["s".to_string(); rows.len()];
        FeatureMatrix::from_rows(names, rows, labels, subjects).unwrap()
    }

    #[test]
    fn knn_separates_well_separated_blobs() {
        let x = blobs(40, 4, 6.0, 1);
        let knn = Knn::fit(&x, 1).unwrap();
        let proba = knn.self_predict();
        let correct = proba
            .iter()
            .zip(x.labels())
            .filter(|(p, l)| p[l.index()] > 0.5)
            .count();
        assert!(correct as f64 >= 0.95 * x.n_rows() as f64, "{correct}");
    }

    #[test]
    fn nb_boundary_sits_between_unit_variance_classes() {
        // Classes at -3 and +3 on a single feature: P(Mw) crosses 0.5 near 0.
        let x = blobs(400, 1, 6.0, 2);
        let nb = GaussianNb::fit(&x).unwrap();
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 / 10.0).collect();
        let rows: Vec<Vec<f64>> = grid.iter().map(|v| vec![*v]).collect();
        let probe = FeatureMatrix::from_rows(
            x.names().to_vec(),
            rows,
            vec![Label::Mw; grid.len()],
            vec!["p".into(); grid.len()],
        )
        .unwrap();
        let proba = nb.predict_proba(&probe).unwrap();
        let crossing = grid
            .iter()
            .zip(&proba)
            .find(|(_, p)| p[1] >= 0.5)
            .map(|(v, _)| *v)
            .unwrap();
        assert!(crossing.abs() <= 0.2, "boundary at {crossing}");
    }

    #[test]
    fn nb_handles_zero_variance_feature() {
        let mut x = blobs(20, 2, 4.0, 3);
        let rows: Vec<Vec<f64>> = (0..x.n_rows())
            .map(|r| {
                let mut row = x.row(r).to_vec();
                row[1] = 1.0;
                row
            })
            .collect();
        x = FeatureMatrix::from_rows(
            x.names().to_vec(),
            rows,
            x.labels().to_vec(),
            x.subject_ids().to_vec(),
        )
        .unwrap();
        let nb = GaussianNb::fit(&x).unwrap();
        let proba = nb.predict_proba(&x).unwrap();
        assert!(proba.iter().all(|p| p[0].is_finite() && p[1].is_finite()));
    }

    #[test]
    fn knn_distance_tie_resolves_to_lower_index() {
        // Two training points equidistant from the query; k = 1 must pick
        // the earlier row.
        let rows = vec![vec![1.0], vec![-1.0], vec![3.0], vec![-3.0]];
        let labels = vec![Label::Mw, Label::NonMw, Label::Mw, Label::NonMw];
        let x = FeatureMatrix::from_rows(
            vec!["CH1_Mean".into()],
            rows,
            labels,
            vec!["s".into(); 4],
        )
        .unwrap();
        let knn = Knn::fit(&x, 1).unwrap();
        let probe = FeatureMatrix::from_rows(
            vec!["CH1_Mean".into()],
            vec![vec![0.0]],
            vec![Label::Mw],
            vec!["p".into()],
        )
        .unwrap();
        let proba = knn.predict_proba(&probe).unwrap();
        // Standardization preserves the symmetry; row 0 (Mw) wins the tie.
        assert!(proba[0][1] > 0.5);
    }
}
