//! Pipeline configuration. Loaded from TOML; command-line flags override
//! config-file values, which override the defaults here.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::EntropyConfig;
use crate::learn::{ClassifierSpec, ForestParams, SearchSpace};
use crate::select::{ChannelMethod, RfeStep, SelectionMethod};
use crate::signal::SynthSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Worker threads; `None` uses the process default.
    pub threads: Option<usize>,
    pub dataset: DatasetSource,
    pub features: FeatureConfig,
    pub classifier: ClassifierSpec,
    /// When set, `evaluate` runs a random hyperparameter search first and
    /// uses the winning forest parameters.
    pub search: Option<SearchConfig>,
    pub selection: SelectionConfig,
    pub bench: BenchConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: None,
            dataset: DatasetSource::Synth(SynthConfig::default()),
            features: FeatureConfig::default(),
            classifier: ClassifierSpec::RandomForest(ForestParams::default()),
            search: None,
            selection: SelectionConfig::default(),
            bench: BenchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// On-disk dataset described by a manifest file.
    Manifest { path: PathBuf },
    /// Synthetic dataset generated from the seed.
    Synth(SynthConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub epochs_per_subject: usize,
    pub n_channels: usize,
    pub informative_channels: Vec<usize>,
    pub separation: f64,
    pub fs: f64,
    pub window_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_subjects: 10,
            epochs_per_subject: 40,
            n_channels: 8,
            informative_channels: vec![0, 1],
            separation: 1.0,
            fs: 100.0,
            window_s: 10.0,
        }
    }
}

impl SynthConfig {
    pub fn to_spec(&self, seed: u64) -> SynthSpec {
        SynthSpec {
            n_subjects: self.n_subjects,
            epochs_per_subject: self.epochs_per_subject,
            n_channels: self.n_channels,
            informative_channels: self.informative_channels.iter().copied().collect::<BTreeSet<_>>(),
            separation: self.separation,
            fs: self.fs,
            window_s: self.window_s,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct FeatureConfig {
    /// Restrict extraction to these channels (all when empty).
    pub channels: Vec<String>,
    pub include_mse: bool,
    pub entropy: EntropyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub n_candidates: usize,
    pub n_folds: usize,
    pub space: SearchSpace,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_candidates: 100,
            n_folds: 5,
            space: SearchSpace::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub channel_method: ChannelMethod,
    /// Channels kept after ranking.
    pub channel_k: usize,
    /// Length of the add-one-channel-at-a-time curve (0 = all channels).
    pub curve_k_max: usize,
    /// Feature-selection methods to compare.
    pub methods: Vec<SelectionMethod>,
    /// Features kept by each method.
    pub k: usize,
    pub rho_thres: f64,
    pub rfe_step: RfeStep,
    /// Forest used while ranking channels and selecting features; falls
    /// back to the main classifier's forest parameters.
    pub ranking_forest: Option<ForestParams>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            channel_method: ChannelMethod::Auc,
            channel_k: 2,
            curve_k_max: 0,
            methods: vec![SelectionMethod::Rfe, SelectionMethod::Ife, SelectionMethod::Cife],
            k: 40,
            rho_thres: 0.9,
            rfe_step: RfeStep::default(),
            ranking_forest: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub rows: usize,
    pub features_per_channel: usize,
    pub channel_counts: Vec<usize>,
    pub tree_counts: Vec<usize>,
    pub max_depth: usize,
    pub repetitions: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            rows: 360,
            features_per_channel: 424,
            channel_counts: vec![2, 8, 30],
            tree_counts: vec![100, 200],
            max_depth: 12,
            repetitions: 5,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: PipelineConfig = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let DatasetSource::Synth(s) = &self.dataset {
            s.to_spec(self.seed); // bounds are checked again at generation
            if s.n_subjects < 2 {
                return Err(Error::Config("synth.n_subjects must be >= 2".into()));
            }
        }
        if self.selection.k == 0 {
            return Err(Error::Config("selection.k must be >= 1".into()));
        }
        if !(self.selection.rho_thres > 0.0) {
            return Err(Error::Config("selection.rho_thres must be > 0".into()));
        }
        if let Some(s) = &self.search {
            if s.n_candidates == 0 || s.n_folds < 2 {
                return Err(Error::Config(
                    "search needs n_candidates >= 1 and n_folds >= 2".into(),
                ));
            }
        }
        if self.bench.repetitions == 0 {
            return Err(Error::Config("bench.repetitions must be >= 1".into()));
        }
        Ok(())
    }

    /// Forest parameters used by selection/ranking fits.
    pub fn selection_forest(&self) -> ForestParams {
        if let Some(p) = self.selection.ranking_forest {
            return p;
        }
        match self.classifier {
            ClassifierSpec::RandomForest(p) => p,
            _ => ForestParams::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = PipelineConfig::default();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: PipelineConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let text = r#"
seed = 42

[dataset.synth]
n_subjects = 4
epochs_per_subject = 8

[classifier.random_forest]
n_trees = 50
max_depth = 6
max_features = "sqrt"
min_samples_leaf = 1
seed = 0
"#;
        let cfg: PipelineConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.seed, 42);
        match &cfg.dataset {
            DatasetSource::Synth(s) => {
                assert_eq!(s.n_subjects, 4);
                assert_eq!(s.n_channels, 8); // default
            }
            other => panic!("unexpected source {other:?}"),
        }
        assert_eq!(cfg.selection.k, 40);
    }
}
