use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("control unit {index} has no density ratio")]
    MissingRatio { index: usize },

    #[error("unit {index} has no ground-truth potential outcomes")]
    MissingGroundTruth { index: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("quadratic program is infeasible")]
    Infeasible,

    #[error("duality gap {gap:.3e} exceeds tolerance {tolerance:.3e} (primal {primal:.9e}, dual {dual:.9e})")]
    DualityGap {
        primal: f64,
        dual: f64,
        gap: f64,
        tolerance: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

/// Coarse failure class, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Infeasible | Error::DualityGap { .. } | Error::Numerical(_) => {
                ErrorClass::Numerical
            }
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Parse(_) => ErrorClass::Io,
            _ => ErrorClass::Config,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
