use thiserror::Error;

/// Errors raised by the solver, the norm functionals and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("field has a nonzero mean mode (|v(0)| = {0:e}); negative-order norms are undefined")]
    NonzeroMean(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("direct convolution refused for n = {0} (limit is 16)")]
    CostGuard(usize),

    #[error("numerical breakdown at t = {t} (step {step}): non-finite coefficients")]
    Breakdown { t: f64, step: u64 },

    #[error("monitor `{monitor}`: {reason}")]
    Monitor { monitor: &'static str, reason: String },

    #[error("config error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
