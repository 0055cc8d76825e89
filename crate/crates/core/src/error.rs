use thiserror::Error;

/// Errors raised by the simulation engine and its supporting modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("point (x = {x} m, r = {r} m) is outside the tissue domain")]
    Domain { x: f64, r: f64 },

    #[error("water content W({theta} °C) is not positive")]
    Singularity { theta: f64 },

    #[error("fit: {0}")]
    Fit(String),

    #[error("fit is rank deficient: {0}")]
    Rank(String),

    #[error("vaporization surrogate is not calibrated (fitA/fitB unset)")]
    NotCalibrated,

    #[error("unstable time step: diffusion number {nu:.4} > 0.5, use dt <= {suggested_dt:.3e}")]
    Instability { nu: f64, suggested_dt: f64 },

    #[error("non-finite value at step {step}, node {node}")]
    Divergence { step: usize, node: usize },

    #[error("calibration: {0}")]
    Calibration(String),

    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    #[error("{}", located("csv", *line, reason))]
    Csv { line: usize, reason: String },

    #[error("series is empty")]
    EmptySeries,

    #[error("comparison: {0}")]
    Comparison(String),

    #[error("{}", located("config", *line, reason))]
    Config { line: usize, reason: String },

    #[error("io: {0}")]
    Io(String),
}

fn located(what: &str, line: usize, reason: &str) -> String {
    if line == 0 {
        format!("{what}: {reason}")
    } else {
        format!("{what} line {line}: {reason}")
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Validation {
        field,
        reason: reason.into(),
    }
}
