use thiserror::Error;

/// Errors raised across forecasting, control and the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("factorization failed after jitter {jitter:.3e} (diag range {min_diag:.3e}..{max_diag:.3e}, last pivot {pivot:.3e})")]
    Numerical {
        jitter: f64,
        min_diag: f64,
        max_diag: f64,
        pivot: f64,
    },

    #[error("training failed: {0}")]
    Training(String),

    #[error("forecast failed: {0}")]
    Forecast(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
