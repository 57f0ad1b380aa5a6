use thiserror::Error;

/// Errors produced across the shaping, channel and estimation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),

    #[error("degenerate PMF: no point carries nonzero probability")]
    DegeneratePmf,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numeric divergence in split-step propagation at step {step}")]
    NumericDivergence { step: usize },

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("evaluator failed: {0}")]
    Evaluator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
