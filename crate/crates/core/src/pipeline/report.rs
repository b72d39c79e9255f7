//! Structured run reports, serialized as schema-versioned pretty JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ExtractionReport;
use crate::learn::{CandidateResult, EvalResult, ForestParams};
use crate::select::{ChannelRanking, ClusterMap, FeatureSelection};
use crate::signal::Provenance;

use super::config::PipelineConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_subjects: usize,
    pub n_epochs: usize,
    pub channels: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBlock {
    pub weighted_f1: f64,
    pub kappa: f64,
    pub auc: f64,
}

impl From<&EvalResult> for MetricsBlock {
    fn from(e: &EvalResult) -> Self {
        Self {
            weighted_f1: e.weighted_f1,
            kappa: e.kappa,
            auc: e.auc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub channels: Vec<String>,
    pub weighted_f1: f64,
    pub kappa: f64,
    pub auc: f64,
    pub train_seconds_total: f64,
}

/// One feature-selection method's outcome: what it chose, how long the
/// selection took, and how the selected features evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionComparison {
    pub selection: FeatureSelection,
    pub eval: MetricsBlock,
    pub eval_train_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub extract_seconds: Option<f64>,
    /// Wall time of the classifier fit, for commands that train exactly one.
    pub train_seconds: Option<f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBlock {
    pub best: ForestParams,
    pub candidates: Vec<CandidateResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTiming {
    pub channels: usize,
    pub n_features: usize,
    pub median_train_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeTiming {
    pub n_trees: usize,
    pub median_train_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: usize,
    pub repetitions: usize,
    pub thread_count: usize,
    pub channel_scaling: Vec<ChannelTiming>,
    pub tree_scaling: Vec<TreeTiming>,
}

/// The one report shape every subcommand writes; sections are present when
/// the command produced them. A report plus the dataset suffices to re-run
/// and match: it echoes the full config and all seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub software: String,
    pub command: String,
    pub seed: u64,
    pub thread_count: usize,
    pub config: PipelineConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extraction: Option<ExtractionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_ranking: Option<ChannelRanking>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_curve: Option<Vec<CurvePoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selections: Option<Vec<SelectionComparison>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters: Option<ClusterMap>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub importances_top: Option<Vec<(String, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchReport>,
    pub timings: Timings,
}

impl RunReport {
    pub fn new(command: &str, config: &PipelineConfig, thread_count: usize) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            software: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            seed: config.seed,
            thread_count,
            config: config.clone(),
            dataset: None,
            extraction: None,
            metrics: None,
            eval: None,
            search: None,
            channel_ranking: None,
            channel_curve: None,
            selections: None,
            clusters: None,
            importances_top: None,
            bench: None,
            timings: Timings {
                extract_seconds: None,
                train_seconds: None,
                total_seconds: 0.0,
            },
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(format!(
            "report serialization failed: {e}"
        )))?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }
}
