use thiserror::Error;

/// Errors produced by the geometry, persistence and statistics pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid point pattern: {0}")]
    InvalidPattern(String),
    #[error("unsupported ambient dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("degenerate input: all points are affinely dependent")]
    DegenerateInput,
    #[error("duplicate points at indices {0} and {1}")]
    DuplicatePoints(usize, usize),
    #[error("input too large for brute-force oracle: {count} points (limit {limit})")]
    TooLarge { count: usize, limit: usize },
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("grid or weight mismatch between functions")]
    GridMismatch,
    #[error("empty input")]
    EmptyInput,
    #[error("too few functions: need at least {needed}, got {got}")]
    TooFewFunctions { needed: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("conditioning did not succeed after {0} attempts")]
    ConditioningTimeout(usize),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
