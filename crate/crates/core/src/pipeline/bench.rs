//! Random-forest scaling benchmark: training wall time versus channel count
//! (feature dimension) and versus tree count, on synthetic matrices with
//! identical rows.
//!
//! Methodology: monotonic clock, one discarded warm-up fit, median over the
//! configured repetitions.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::learn::{train_random_forest, ForestParams, MaxFeatures};
use crate::seeding;
use crate::signal::Label;

use super::config::BenchConfig;
use super::report::{BenchReport, ChannelTiming, TreeTiming};

/// Gaussian feature matrix with a handful of informative columns so trees
/// have real structure to split on.
fn synth_matrix(rows: usize, channels: usize, per_channel: usize, seed: u64) -> FeatureMatrix {
    let n_features = channels * per_channel;
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[channels as u64]));
    let mut data = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for r in 0..rows {
        let mw = r % 2 == 0;
        let mut row: Vec<f64> = (0..n_features)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        if mw {
            // Small shift on one column per channel keeps splits meaningful
            // without making trees trivially shallow.
            for c in 0..channels {
                row[c * per_channel] += 0.6;
            }
        }
        labels.push(if mw { Label::Mw } else { Label::NonMw });
        data.push(row);
    }
    let names: Vec<String> = (0..channels)
        .flat_map(|c| (0..per_channel).map(move |f| format!("CH{}_MPE-{}", c + 1, f + 1)))
        .collect();
    let subjects: Vec<String> = (0..rows).map(|r| format!("s{}", r % 8)).collect();
    FeatureMatrix::from_rows(names, data, labels, subjects).expect("bench matrix is well formed")
}

fn median_fit_seconds(x: &FeatureMatrix, params: &ForestParams, repetitions: usize) -> Result<f64> {
    train_random_forest(x, params)?; // warm-up, discarded
    let mut times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let t0 = Instant::now();
        train_random_forest(x, params)?;
        times.push(t0.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    Ok(if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    })
}

pub fn run_bench(cfg: &BenchConfig, base_trees: usize, seed: u64) -> Result<BenchReport> {
    let mut channel_scaling = Vec::new();
    for &channels in &cfg.channel_counts {
        let x = synth_matrix(cfg.rows, channels, cfg.features_per_channel, seed);
        let params = ForestParams {
            n_trees: base_trees,
            max_depth: cfg.max_depth,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            seed: seeding::derive(seed, &[1, channels as u64]),
        };
        channel_scaling.push(ChannelTiming {
            channels,
            n_features: x.n_cols(),
            median_train_seconds: median_fit_seconds(&x, &params, cfg.repetitions)?,
        });
    }

    let reference_channels = cfg.channel_counts.first().copied().unwrap_or(2);
    let x = synth_matrix(cfg.rows, reference_channels, cfg.features_per_channel, seed);
    let mut tree_scaling = Vec::new();
    for &n_trees in &cfg.tree_counts {
        let params = ForestParams {
            n_trees,
            max_depth: cfg.max_depth,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            seed: seeding::derive(seed, &[2, n_trees as u64]),
        };
        tree_scaling.push(TreeTiming {
            n_trees,
            median_train_seconds: median_fit_seconds(&x, &params, cfg.repetitions)?,
        });
    }

    Ok(BenchReport {
        rows: cfg.rows,
        repetitions: cfg.repetitions,
        thread_count: rayon::current_num_threads(),
        channel_scaling,
        tree_scaling,
    })
}
