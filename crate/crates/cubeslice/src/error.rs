use thiserror::Error;

/// Errors produced by the slicing library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "dimension {n} exceeds the brute-force limit of {limit}; \
         use the reduced-grid path for larger instances"
    )]
    DimensionTooLarge { n: usize, limit: usize },

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("plane violates the composition in block {block}: coefficients within a block must be equal")]
    CompositionViolation { block: usize },

    #[error("reduced grid too large: {0}")]
    GridTooLarge(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("degenerate search configuration: {0}")]
    DegenerateConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no known value for S({n},{k})")]
    NotFound { n: u32, k: u32 },

    #[error("coefficients too large for exact sign tests")]
    CoefficientOverflow,
}

pub type Result<T> = std::result::Result<T, Error>;
