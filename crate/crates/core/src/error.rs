use thiserror::Error;

/// Errors raised by field construction, validation and the batch harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bidegree ({p},{q}) exceeds complex dimension {n}")]
    BidegreeOverflow { p: usize, q: usize, n: usize },

    #[error("expected bidegree ({expected_p},{expected_q}), got ({p},{q})")]
    WrongBidegree {
        expected_p: usize,
        expected_q: usize,
        p: usize,
        q: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("metric is singular or not positive definite at grid point {point}")]
    SingularMetric { point: usize },

    #[error("invariant `{name}` violated: residual {value:.3e} exceeds tolerance {tolerance:.1e}")]
    InvariantViolation {
        name: String,
        value: f64,
        tolerance: f64,
    },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("path leaves the space of metrics at t = {t}")]
    InvalidPath { t: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invariant(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Error::InvariantViolation {
            name: name.into(),
            value,
            tolerance,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
