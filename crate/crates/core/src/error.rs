use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid bracket [{w_lo}, {w_hi}]: both ends classify as {class}")]
    InvalidBracket { w_lo: f64, w_hi: f64, class: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fixed point did not converge after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("solver failure at r = {r}: {message}")]
    SolverFailure {
        r: f64,
        state: Vec<f64>,
        message: String,
    },

    #[error("no bound state: {0}")]
    NoBoundState(String),

    #[error("invalid fit window: {0}")]
    InvalidWindow(String),

    #[error("no stable fit window on a profile ending at r = {r_max}")]
    NoStableWindow { r_max: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used for CLI exit codes and error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::InvalidBracket { .. } => "invalid-bracket",
            Error::Domain(_) => "domain-error",
            Error::NonConvergence { .. } => "non-convergence",
            Error::SolverFailure { .. } => "solver-failure",
            Error::NoBoundState(_) => "no-bound-state",
            Error::InvalidWindow(_) => "invalid-window",
            Error::NoStableWindow { .. } => "no-stable-window",
            Error::Io(_) => "io-error",
            Error::Csv(_) => "io-error",
            Error::Json(_) => "io-error",
        }
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
