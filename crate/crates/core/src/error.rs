//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in `{path}`: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("channel count mismatch in `{path}`: header has {expected} channels, row {row} has {found} fields")]
    ChannelCountMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
        row: usize,
    },

    #[error("non-finite sample in `{path}` at row {row}, channel `{channel}`")]
    NonFiniteSample {
        path: PathBuf,
        row: usize,
        channel: String,
    },

    #[error("event times not strictly increasing (t={t} follows t={prev})")]
    NonMonotoneEvents { prev: f64, t: f64 },

    #[error("probe rating {0} outside 1..=7")]
    InvalidRating(i64),

    #[error("event time {t} outside recording range [0, {max}]")]
    EventOutOfRange { t: f64, max: f64 },

    #[error("duplicate channel name `{0}`")]
    DuplicateChannel(String),

    #[error("channel `{0}` not present in recording")]
    MissingChannel(String),

    #[error("invalid band edges: need 0 < lo < hi < fs/2, got lo={lo}, hi={hi}, fs={fs}")]
    BandEdges { lo: f64, hi: f64, fs: f64 },

    #[error("band [{lo}, {hi}) contains no PSD bins")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("series too short: length {len}, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("scale {scale} too large for series of length {len} (coarse-grained length {coarse} below minimum {min})")]
    ScaleTooLarge {
        scale: usize,
        len: usize,
        coarse: usize,
        min: usize,
    },

    #[error("undefined sample entropy: {template_matches} template matches, {extended_matches} extended matches")]
    UndefinedEntropy {
        template_matches: u64,
        extended_matches: u64,
    },

    #[error("zero standard deviation: {0}")]
    ZeroVariance(&'static str),

    #[error("invalid entropy parameters: {0}")]
    EntropyParams(String),

    #[error("all wavelet coefficients are zero")]
    AllZeroCoefficients,

    #[error("dataset is empty after {0}")]
    EmptyDataset(&'static str),

    #[error("labels contain a single class; need both")]
    SingleClass,

    #[error("feature matrix is empty")]
    EmptyMatrix,

    #[error("feature names do not match the trained model (expected {expected} features, got {got})")]
    FeatureMismatch { expected: usize, got: usize },

    #[error("unknown feature name `{0}`")]
    UnknownFeature(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

impl Error {
    /// Coarse category used for CLI error reporting.
    pub fn category(&self) -> &'static str {
        use Error::*;
        match self {
            Io { .. } => "io",
            Parse { .. } | ChannelCountMismatch { .. } | NonFiniteSample { .. } => "format",
            Config(_) => "config",
            NonMonotoneEvents { .. }
            | InvalidRating(_)
            | EventOutOfRange { .. }
            | DuplicateChannel(_)
            | MissingChannel(_) => "data",
            BandEdges { .. } | EmptyBand { .. } => "band",
            SeriesTooShort { .. } | ScaleTooLarge { .. } | EntropyParams(_) => "params",
            UndefinedEntropy { .. } | ZeroVariance(_) | AllZeroCoefficients => "degenerate",
            EmptyDataset(_) | SingleClass | EmptyMatrix => "dataset",
            FeatureMismatch { .. } | UnknownFeature(_) => "features",
            InvalidArgument(_) | LengthMismatch { .. } => "argument",
        }
    }
}
