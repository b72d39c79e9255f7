//! Mind-wandering detection from multichannel time series.
//!
//! The crate covers the full pipeline: preprocessing and epoching of
//! multichannel recordings, a per-channel feature bank dominated by
//! multiscale entropy estimators, a random-forest classifier evaluated with
//! leave-one-subject-out cross-validation, and channel/feature selection with
//! wall-clock timing instrumentation.
//!
//! Start with the runnable programs under `examples/`; each one exercises a
//! major capability end to end on synthetic data.

pub mod entropy;
pub mod error;
pub mod features;
pub mod learn;
pub mod pipeline;
pub mod seeding;
pub mod select;
pub mod signal;

pub use error::{Error, Result};
