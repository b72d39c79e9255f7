//! Random forest with Gini-impurity splits and impurity-based feature
//! importances.
//!
//! Trees are grown on bootstrap samples; at every node a uniformly random
//! feature subset is scored. Each tree draws from its own seeded generator,
//! so training is deterministic for a fixed seed regardless of how trees are
//! scheduled across threads. Equal-gain splits resolve to the lowest feature
//! index, then the lowest threshold.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::seeding;
use crate::signal::Label;

/// Node feature-subset size rule; `Sqrt` mirrors the usual k_sample = sqrt(k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Fraction(f64),
}

impl MaxFeatures {
    fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Fraction(f) => (f * n_features as f64).floor() as usize,
        };
        k.clamp(1, n_features)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    /// The reference configuration: 700 trees, depth 12, sqrt feature
    /// sampling.
    fn default() -> Self {
        Self {
            n_trees: 700,
            max_depth: 12,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

const LEAF: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    feature: u32,
    threshold: f64,
    left: u32,
    right: u32,
    counts: [u32; 2],
}

#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn vote(&self, row: &[f64]) -> usize {
        let mut at = 0usize;
        loop {
            let node = &self.nodes[at];
            if node.feature == LEAF {
                // Majority vote, ties to class 0.
                return usize::from(node.counts[1] > node.counts[0]);
            }
            at = if row[node.feature as usize] <= node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            let n = &nodes[at];
            if n.feature == LEAF {
                0
            } else {
                1 + walk(nodes, n.left as usize).max(walk(nodes, n.right as usize))
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone)]
pub struct TrainedForest {
    trees: Vec<Tree>,
    importances: Vec<f64>,
    feature_names: Vec<String>,
    pub params: ForestParams,
}

struct TreeBuilder<'a> {
    cols: &'a [Vec<f64>],
    labels: &'a [u8],
    max_depth: usize,
    min_leaf: usize,
    k_sample: usize,
    rng: ChaCha8Rng,
    pool: Vec<u32>,
    idx: Vec<u32>,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    scratch: Vec<(f64, u8)>,
    n_inbag: f64,
}

fn gini(counts: [u32; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

impl<'a> TreeBuilder<'a> {
    fn counts(&self, start: usize, end: usize) -> [u32; 2] {
        let mut c = [0u32; 2];
        for &i in &self.idx[start..end] {
            c[self.labels[i as usize] as usize] += 1;
        }
        c
    }

    fn build(&mut self, start: usize, end: usize, depth: usize) -> u32 {
        let counts = self.counts(start, end);
        let n = end - start;
        let node_id = self.nodes.len() as u32;
        self.nodes.push(Node {
            feature: LEAF,
            threshold: 0.0,
            left: 0,
            right: 0,
            counts,
        });
        if depth >= self.max_depth
            || n < 2 * self.min_leaf
            || counts[0] == 0
            || counts[1] == 0
        {
            return node_id;
        }

        // Partial Fisher-Yates over the feature pool.
        let k_total = self.pool.len();
        for i in 0..self.k_sample {
            let j = self.rng.gen_range(i..k_total);
            self.pool.swap(i, j);
        }

        let parent_imp = gini(counts);
        let mut best: Option<(f64, u32, f64, usize)> = None; // gain, feature, threshold, n_left
        for slot in 0..self.k_sample {
            let f = self.pool[slot];
            let col = &self.cols[f as usize];
            self.scratch.clear();
            self.scratch.extend(
                self.idx[start..end]
                    .iter()
                    .map(|&i| (col[i as usize], self.labels[i as usize])),
            );
            self.scratch
                .sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = [0u32; 2];
            for cut in 1..n {
                let (prev_v, prev_l) = self.scratch[cut - 1];
                left[prev_l as usize] += 1;
                let v = self.scratch[cut].0;
                if v == prev_v {
                    continue;
                }
                let n_left = cut;
                let n_right = n - cut;
                if n_left < self.min_leaf || n_right < self.min_leaf {
                    continue;
                }
                let right = [counts[0] - left[0], counts[1] - left[1]];
                let gain = parent_imp
                    - (n_left as f64 / n as f64) * gini(left)
                    - (n_right as f64 / n as f64) * gini(right);
                let mut threshold = prev_v + (v - prev_v) / 2.0;
                if threshold >= v {
                    threshold = prev_v;
                }
                let candidate = (gain, f, threshold, n_left);
                let better = match &best {
                    None => gain > 0.0,
                    Some((bg, bf, bt, _)) => {
                        gain > *bg
                            || (gain == *bg && (f < *bf || (f == *bf && threshold < *bt)))
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
        }

        let Some((gain, feature, threshold, _)) = best else {
            return node_id;
        };

        // Weighted impurity decrease, normalized by the in-bag total.
        self.importance[feature as usize] += (n as f64 / self.n_inbag) * gain;

        // Stable partition of the index range around the threshold.
        let col = &self.cols[feature as usize];
        let mut left_idx = Vec::with_capacity(n);
        let mut right_idx = Vec::with_capacity(n);
        for &i in &self.idx[start..end] {
            if col[i as usize] <= threshold {
                left_idx.push(i);
            } else {
                right_idx.push(i);
            }
        }
        let n_left = left_idx.len();
        debug_assert!(n_left > 0 && n_left < n);
        self.idx[start..start + n_left].copy_from_slice(&left_idx);
        self.idx[start + n_left..end].copy_from_slice(&right_idx);

        let left = self.build(start, start + n_left, depth + 1);
        let right = self.build(start + n_left, end, depth + 1);
        let node = &mut self.nodes[node_id as usize];
        node.feature = feature;
        node.threshold = threshold;
        node.left = left;
        node.right = right;
        node_id
    }
}

fn train_single_tree(
    cols: &[Vec<f64>],
    labels: &[u8],
    p: &ForestParams,
    tree_index: usize,
) -> (Tree, Vec<f64>) {
    let n_rows = labels.len();
    let n_features = cols.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(p.seed, &[tree_index as u64]));
    let idx: Vec<u32> = (0..n_rows)
        .map(|_| rng.gen_range(0..n_rows) as u32)
        .collect();
    let mut builder = TreeBuilder {
        cols,
        labels,
        max_depth: p.max_depth,
        min_leaf: p.min_samples_leaf.max(1),
        k_sample: p.max_features.resolve(n_features),
        rng,
        pool: (0..n_features as u32).collect(),
        idx,
        nodes: Vec::new(),
        importance: vec![0.0; n_features],
        scratch: Vec::with_capacity(n_rows),
        n_inbag: n_rows as f64,
    };
    builder.build(0, n_rows, 0);
    let total: f64 = builder.importance.iter().sum();
    if total > 0.0 {
        for v in &mut builder.importance {
            *v /= total;
        }
    }
    (Tree { nodes: builder.nodes }, builder.importance)
}

/// Train a forest on a feature matrix. Requires both classes and at least
/// one row and column.
pub fn train_random_forest(x: &FeatureMatrix, p: &ForestParams) -> Result<TrainedForest> {
    if x.n_rows() == 0 || x.n_cols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if p.n_trees == 0 || p.max_depth == 0 {
        return Err(Error::InvalidArgument("n_trees and max_depth must be >= 1".into()));
    }
    let labels: Vec<u8> = x.labels().iter().map(|l| l.index() as u8).collect();
    if labels.iter().all(|&l| l == 0) || labels.iter().all(|&l| l == 1) {
        return Err(Error::SingleClass);
    }
    let cols: Vec<Vec<f64>> = (0..x.n_cols()).map(|c| x.column(c)).collect();

    let results: Vec<(Tree, Vec<f64>)> = (0..p.n_trees)
        .into_par_iter()
        .map(|t| train_single_tree(&cols, &labels, p, t))
        .collect();

    let mut importances = vec![0.0f64; x.n_cols()];
    let mut trees = Vec::with_capacity(p.n_trees);
    for (tree, imp) in results {
        for (acc, v) in importances.iter_mut().zip(&imp) {
            *acc += v;
        }
        trees.push(tree);
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        for v in &mut importances {
            *v /= total;
        }
    }
    Ok(TrainedForest {
        trees,
        importances,
        feature_names: x.names().to_vec(),
        params: *p,
    })
}

impl TrainedForest {
    /// Normalized total impurity decrease per feature; sums to 1 whenever
    /// any split happened.
    pub fn importances(&self) -> &[f64] {
        &self.importances
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// [P(NonMw), P(Mw)] per row as the fraction of per-tree leaf-majority
    /// votes; the pair sums to exactly 1.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>> {
        if x.names() != self.feature_names.as_slice() {
            return Err(Error::FeatureMismatch {
                expected: self.feature_names.len(),
                got: x.n_cols(),
            });
        }
        Ok((0..x.n_rows())
            .map(|r| {
                let row = x.row(r);
                let mw_votes = self
                    .trees
                    .iter()
                    .filter(|t| t.vote(row) == Label::Mw.index())
                    .count();
                let p_mw = mw_votes as f64 / self.trees.len() as f64;
                [1.0 - p_mw, p_mw]
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// label = (feature_0 > 0) with noise features appended.
    fn threshold_dataset(n_rows: usize, n_noise: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n_rows);
        let mut labels = Vec::with_capacity(n_rows);
        for _ in 0..n_rows {
            let x0 = rng.gen::<f64>() * 2.0 - 1.0;
            let mut row = vec![x0];
            row.extend((0..n_noise).map(|_| rng.gen::<f64>() * 2.0 - 1.0));
            labels.push(if x0 > 0.0 { Label::Mw } else { Label::NonMw });
            rows.push(row);
        }
        let names: Vec<String> = (0..=n_noise).map(|i| format!("CH1_MSE-{}", i + 1)).collect();
        let subjects = vec!["s1".to_string(); n_rows];
        FeatureMatrix::from_rows(names, rows, labels, subjects).unwrap()
    }

    fn small_params(n_trees: usize, seed: u64) -> ForestParams {
        ForestParams {
            n_trees,
            max_depth: 8,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            seed,
        }
    }

    #[test]
    fn importances_sum_to_one() {
        let x = threshold_dataset(120, 20, 1);
        let f = train_random_forest(&x, &small_params(50, 3)).unwrap();
        let total: f64 = f.importances().iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "sum = {total}");
        assert!(f.importances().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn informative_feature_dominates_importance() {
        let x = threshold_dataset(200, 49, 2);
        let f = train_random_forest(&x, &small_params(100, 5)).unwrap();
        assert!(
            f.importances()[0] >= 0.5,
            "importance of the labeling feature: {}",
            f.importances()[0]
        );
    }

    #[test]
    fn training_is_deterministic() {
        let x = threshold_dataset(80, 10, 3);
        let probe = threshold_dataset(30, 10, 99);
        let a = train_random_forest(&x, &small_params(30, 7)).unwrap();
        let b = train_random_forest(&x, &small_params(30, 7)).unwrap();
        assert_eq!(a.predict_proba(&probe).unwrap(), b.predict_proba(&probe).unwrap());
        assert_eq!(a.importances(), b.importances());
    }

    #[test]
    fn probability_rows_sum_to_one_exactly() {
        let x = threshold_dataset(60, 5, 4);
        let f = train_random_forest(&x, &small_params(7, 11)).unwrap();
        for p in f.predict_proba(&x).unwrap() {
            assert_eq!(p[0] + p[1], 1.0);
        }
    }

    #[test]
    fn single_tree_probabilities_are_zero_or_one() {
        let x = threshold_dataset(60, 5, 5);
        let f = train_random_forest(&x, &small_params(1, 13)).unwrap();
        for p in f.predict_proba(&x).unwrap() {
            assert!(p[1] == 0.0 || p[1] == 1.0);
        }
    }

    #[test]
    fn deep_forest_memorizes_training_data() {
        let x = threshold_dataset(150, 10, 6);
        let params = ForestParams {
            n_trees: 200,
            max_depth: 40,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            seed: 17,
        };
        let f = train_random_forest(&x, &params).unwrap();
        let proba = f.predict_proba(&x).unwrap();
        let good = proba
            .iter()
            .zip(x.labels())
            .filter(|(p, l)| p[l.index()] >= 0.5)
            .count();
        assert!(
            good as f64 >= 0.95 * x.n_rows() as f64,
            "{good}/{} rows with majority-class probability >= 0.5",
            x.n_rows()
        );
    }

    #[test]
    fn depth_limit_is_respected() {
        let x = threshold_dataset(300, 10, 7);
        let params = ForestParams {
            max_depth: 3,
            ..small_params(40, 19)
        };
        let f = train_random_forest(&x, &params).unwrap();
        for t in f.trees() {
            assert!(t.depth() <= 3);
        }
    }

    #[test]
    fn positive_column_scaling_keeps_predictions() {
        let x = threshold_dataset(100, 10, 8);
        let f = train_random_forest(&x, &small_params(40, 23)).unwrap();
        let base = f.predict_proba(&x).unwrap();

        let scaled_rows: Vec<Vec<f64>> = (0..x.n_rows())
            .map(|r| x.row(r).iter().map(|v| v * 3.7).collect())
            .collect();
        let scaled = FeatureMatrix::from_rows(
            x.names().to_vec(),
            scaled_rows,
            x.labels().to_vec(),
            x.subject_ids().to_vec(),
        )
        .unwrap();
        let f2 = train_random_forest(&scaled, &small_params(40, 23)).unwrap();
        let pred = f2.predict_proba(&scaled).unwrap();
        assert_eq!(base, pred);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let x = threshold_dataset(20, 2, 9);
        let all_one = FeatureMatrix::from_rows(
            x.names().to_vec(),
            (0..x.n_rows()).map(|r| x.row(r).to_vec()).collect(),
            vec![Label::Mw; x.n_rows()],
            x.subject_ids().to_vec(),
        )
        .unwrap();
        assert!(matches!(
            train_random_forest(&all_one, &small_params(5, 1)),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn feature_name_mismatch_is_rejected() {
        let x = threshold_dataset(30, 2, 10);
        let f = train_random_forest(&x, &small_params(5, 1)).unwrap();
        let other = threshold_dataset(30, 3, 10);
        assert!(matches!(
            f.predict_proba(&other),
            Err(Error::FeatureMismatch { .. })
        ));
    }
}
