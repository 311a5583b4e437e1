use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation failed at log t = {x}: {reason}")]
    Evaluation { x: f64, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {reason} (condition estimate {condition:e})")]
    Numerical { reason: String, condition: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn eval(x: f64, reason: impl Into<String>) -> Self {
        Error::Evaluation {
            x,
            reason: reason.into(),
        }
    }
}
