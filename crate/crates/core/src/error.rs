use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid search problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("grid of {points} intervals cannot resolve mode index {max_index} (need at least {required})")]
    Resolution {
        points: usize,
        max_index: u64,
        required: usize,
    },

    #[error("non-finite amplitude at step {step} (t = {t}, dt = {dt}); the step size is too large")]
    NonFinite { step: u64, t: f64, dt: f64 },

    #[error("{steps} steps needed but the cap is {cap}")]
    StepCapExceeded { steps: u64, cap: u64 },

    #[error("trajectory ends at t = {available} but the analysis needs t = {needed}")]
    WindowTooShort { needed: f64, available: f64 },

    #[error("trajectory and model do not match: {0}")]
    WindowMismatch(String),

    #[error("run with N = {n} failed: {source}")]
    Scan {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse failure classes, used by the command-line driver for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Io,
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidSpectrum(_)
            | Error::InvalidProblem(_)
            | Error::Config { .. }
            | Error::Resolution { .. } => ErrorClass::Config,
            Error::NonFinite { .. }
            | Error::StepCapExceeded { .. }
            | Error::WindowTooShort { .. }
            | Error::WindowMismatch(_) => ErrorClass::Numerical,
            Error::Scan { source, .. } => source.class(),
            Error::Io { .. } => ErrorClass::Io,
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpectrum(_) => "invalid_spectrum",
            Error::InvalidProblem(_) => "invalid_problem",
            Error::Config { .. } => "config",
            Error::Resolution { .. } => "resolution",
            Error::NonFinite { .. } => "non_finite",
            Error::StepCapExceeded { .. } => "step_cap_exceeded",
            Error::WindowTooShort { .. } => "window_too_short",
            Error::WindowMismatch(_) => "window_mismatch",
            Error::Scan { source, .. } => source.kind(),
            Error::Io { .. } => "io",
        }
    }
}
