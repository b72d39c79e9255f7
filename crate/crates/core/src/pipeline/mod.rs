//! Pipeline orchestration: configuration, commands, reports, and the
//! training-time benchmark harness.

pub mod bench;
pub mod commands;
pub mod config;
pub mod report;

pub use commands::{
    cmd_bench, cmd_evaluate, cmd_extract, cmd_select_channels, cmd_select_features, cmd_synth,
    cmd_train, load_or_generate, with_thread_pool, CommandOutput,
};
pub use config::{BenchConfig, DatasetSource, FeatureConfig, PipelineConfig, SearchConfig, SelectionConfig, SynthConfig};
pub use report::{BenchReport, MetricsBlock, RunReport};
