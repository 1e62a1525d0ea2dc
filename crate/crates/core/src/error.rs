//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Weight normalization received an empty or all-zero weight vector.
    #[error("degenerate weights: input is empty or sums to zero")]
    DegenerateWeights,

    /// An operation requiring normalized weights received weights summing to
    /// something other than one.
    #[error("weights not normalized: sum = {sum}")]
    UnnormalizedWeights { sum: f64 },

    /// A caller broke an operation precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A configuration field is out of its valid range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A scenario or track file failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    /// Scenario region has zero or negative extent.
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    /// A convoy object's entry step lies beyond the base track.
    #[error("object {object} enters at step {entry_step} but the track has only {track_len} steps")]
    ObjectNeverEnters {
        object: usize,
        entry_step: usize,
        track_len: usize,
    },

    /// Birth label ordinal space exhausted (practically unreachable).
    #[error("label counter exhausted at step {step}")]
    LabelOverflow { step: i64 },
}
