use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver did not converge after {iterations} iterations; residuals {residuals:?}")]
    NonConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("no sign change of the root function on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("empty neighborhood: {0}")]
    EmptyNeighborhood(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
