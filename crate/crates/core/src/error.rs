use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time {time} is not a node of the grid (t0 = {t0}, dt = {dt})")]
    OffGrid { time: f64, t0: f64, dt: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("covariance embedding is not positive semi-definite (n = {n}, min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { n: usize, min_eigenvalue: f64 },

    #[error("exact fBm synthesis capped at n = {cap}, requested {n}")]
    CapExceeded { n: usize, cap: usize },

    #[error("integration failed at step {step}: state {value}")]
    Integration { step: usize, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
