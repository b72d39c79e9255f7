//! Feature selection: importance feature elimination (IFE), recursive
//! feature elimination (RFE), and correlation importance feature
//! elimination (CIFE).
//!
//! CIFE runs two steps. Step 1 is unsupervised: features with |Pearson
//! correlation| at or above the threshold are linked, clusters are the
//! connected components, and each cluster keeps one representative (the
//! member with the largest mean absolute correlation to its cluster, ties
//! to the lower column index). Step 2 fits a single random forest on the
//! representatives and keeps the top-k by importance. Wall times cover the
//! method's own work, classifier fits included, feature extraction
//! excluded.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::learn::{train_random_forest, ForestParams};
use crate::seeding;

use super::stats::pearson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Ife,
    Rfe,
    Cife,
}

/// RFE elimination schedule per round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RfeStep {
    Fixed(usize),
    /// Fraction of the remaining features, floored at one.
    FractionOfRemaining(f64),
}

impl Default for RfeStep {
    fn default() -> Self {
        RfeStep::FractionOfRemaining(0.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub method: SelectionMethod,
    /// Selected names ordered by decreasing importance.
    pub selected: Vec<String>,
    pub wall_seconds: f64,
    pub k: usize,
    pub rho_thres: Option<f64>,
    pub n_fits: usize,
}

/// Step-1 output of CIFE: cluster id per feature and one representative per
/// cluster. Built without labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMap {
    pub cluster_of: BTreeMap<String, usize>,
    pub representatives: Vec<String>,
    pub step_seconds: f64,
}

impl ClusterMap {
    pub fn n_clusters(&self) -> usize {
        self.representatives.len()
    }
}

/// Column order by decreasing importance, ties to the lower index.
fn importance_order(importances: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..importances.len()).collect();
    order.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
    order
}

/// Top-k features of a single random-forest fit.
pub fn ife(x: &FeatureMatrix, k: usize, forest: &ForestParams, seed: u64) -> Result<FeatureSelection> {
    if k == 0 || k > x.n_cols() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            x.n_cols()
        )));
    }
    let t0 = Instant::now();
    let params = ForestParams {
        seed: seeding::derive(seed, &[0]),
        ..*forest
    };
    let f = train_random_forest(x, &params)?;
    let order = importance_order(f.importances());
    let selected: Vec<String> = order[..k].iter().map(|&c| x.names()[c].clone()).collect();
    Ok(FeatureSelection {
        method: SelectionMethod::Ife,
        selected,
        wall_seconds: t0.elapsed().as_secs_f64(),
        k,
        rho_thres: None,
        n_fits: 1,
    })
}

/// Recursive elimination: repeatedly fit, drop the least-important `step`
/// features, until k remain. Survivors are ordered by the final fit's
/// importances.
pub fn rfe(
    x: &FeatureMatrix,
    k: usize,
    step: RfeStep,
    forest: &ForestParams,
    seed: u64,
) -> Result<FeatureSelection> {
    if k == 0 || k > x.n_cols() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            x.n_cols()
        )));
    }
    match step {
        RfeStep::Fixed(0) => {
            return Err(Error::InvalidArgument("step must be >= 1".into()));
        }
        RfeStep::FractionOfRemaining(f) if !(f > 0.0 && f <= 1.0) => {
            return Err(Error::InvalidArgument("step fraction must lie in (0, 1]".into()));
        }
        _ => {}
    }
    let t0 = Instant::now();
    let mut current = x.clone();
    let mut n_fits = 0usize;
    let mut round = 0u64;
    // Survivors are ordered by the fit of the round that reached k.
    let selected: Vec<String> = loop {
        let params = ForestParams {
            seed: seeding::derive(seed, &[round]),
            ..*forest
        };
        let f = train_random_forest(&current, &params)?;
        n_fits += 1;
        let order = importance_order(f.importances());
        let ranked: Vec<String> = order.iter().map(|&c| current.names()[c].clone()).collect();
        let remaining = current.n_cols();
        if remaining == k {
            break ranked;
        }
        let drop = match step {
            RfeStep::Fixed(s) => s,
            RfeStep::FractionOfRemaining(frac) => ((remaining as f64 * frac) as usize).max(1),
        }
        .min(remaining - k);
        let keep: Vec<String> = ranked[..remaining - drop].to_vec();
        if keep.len() == k {
            break keep;
        }
        current = current.select_columns(&keep)?;
        round += 1;
    };
    Ok(FeatureSelection {
        method: SelectionMethod::Rfe,
        selected,
        wall_seconds: t0.elapsed().as_secs_f64(),
        k,
        rho_thres: None,
        n_fits,
    })
}

/// CIFE step 1: correlation clustering. Constant columns correlate 0 with
/// everything; a threshold above 1 yields all-singleton clusters.
pub fn correlation_clusters(x: &FeatureMatrix, rho_thres: f64) -> Result<ClusterMap> {
    if !(rho_thres > 0.0) {
        return Err(Error::InvalidArgument("rho_thres must be > 0".into()));
    }
    let t0 = Instant::now();
    let n = x.n_cols();
    let cols: Vec<Vec<f64>> = (0..n).map(|c| x.column(c)).collect();

    // |rho| for every pair; union-find over threshold edges.
    let mut abs_rho = vec![0.0f64; n * n];
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut at = i;
        while parent[at] != root {
            let next = parent[at];
            parent[at] = root;
            at = next;
        }
        root
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let r = pearson(&cols[i], &cols[j]).unwrap_or(0.0).abs();
            abs_rho[i * n + j] = r;
            abs_rho[j * n + i] = r;
            if r >= rho_thres {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    // Attach the larger root under the smaller for
                    // deterministic ids.
                    let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                    parent[hi] = lo;
                }
            }
        }
    }

    // Cluster ids numbered by first appearance in column order.
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        members.entry(root).or_default().push(i);
    }
    let mut cluster_of = BTreeMap::new();
    let mut representatives = Vec::with_capacity(members.len());
    for (cluster_id, (_, cols_in)) in members.into_iter().enumerate() {
        for &c in &cols_in {
            cluster_of.insert(x.names()[c].clone(), cluster_id);
        }
        // Medoid-like representative: largest mean |rho| to the rest of the
        // cluster, ties to the lower index.
        let rep = if cols_in.len() == 1 {
            cols_in[0]
        } else {
            let mut best = cols_in[0];
            let mut best_score = f64::NEG_INFINITY;
            for &c in &cols_in {
                let score = cols_in
                    .iter()
                    .filter(|&&o| o != c)
                    .map(|&o| abs_rho[c * n + o])
                    .sum::<f64>()
                    / (cols_in.len() - 1) as f64;
                if score > best_score {
                    best = c;
                    best_score = score;
                }
            }
            best
        };
        representatives.push(x.names()[rep].clone());
    }
    Ok(ClusterMap {
        cluster_of,
        representatives,
        step_seconds: t0.elapsed().as_secs_f64(),
    })
}

/// CIFE: correlation clustering, then a single importance-ranked fit on the
/// cluster representatives.
pub fn cife(
    x: &FeatureMatrix,
    rho_thres: f64,
    k: usize,
    forest: &ForestParams,
    seed: u64,
) -> Result<(FeatureSelection, ClusterMap)> {
    let t0 = Instant::now();
    let clusters = correlation_clusters(x, rho_thres)?;
    if k == 0 || k > clusters.n_clusters() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={} clusters",
            clusters.n_clusters()
        )));
    }
    let reduced = x.select_columns(&clusters.representatives)?;
    let params = ForestParams {
        seed: seeding::derive(seed, &[0]),
        ..*forest
    };
    let f = train_random_forest(&reduced, &params)?;
    let order = importance_order(f.importances());
    let selected: Vec<String> = order[..k]
        .iter()
        .map(|&c| reduced.names()[c].clone())
        .collect();
    let selection = FeatureSelection {
        method: SelectionMethod::Cife,
        selected,
        wall_seconds: t0.elapsed().as_secs_f64(),
        k,
        rho_thres: Some(rho_thres),
        n_fits: 1,
    };
    Ok((selection, clusters))
}
