//! Channel and feature selection with wall-clock timing instrumentation.

mod channels;
mod elimination;
pub mod stats;

pub use channels::{channel_curve, rank_channels, salient_feature_counts, ChannelMethod, ChannelRanking};
pub use elimination::{cife, correlation_clusters, ife, rfe, ClusterMap, FeatureSelection, RfeStep, SelectionMethod};
pub use stats::{mann_whitney_p, pearson};
