use thiserror::Error;

use crate::geometry::Metric;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate point index {0} in subset")]
    DuplicateIndex(usize),

    #[error("subset must be non-empty")]
    EmptySubset,

    #[error("invalid subset size k={k} for {n} points (need {min} <= k <= n)")]
    InvalidK { k: usize, n: usize, min: usize },

    #[error("coordinate {value} exceeds the magnitude bound 2^40")]
    CoordinateOverflow { value: i128 },

    #[error("metric {metric} requires dimension 2, got {dim}")]
    UnsupportedMetric { metric: Metric, dim: usize },

    #[error("{what} requires {count} evaluations, over the budget of {budget}")]
    BudgetExceeded {
        what: &'static str,
        count: u128,
        budget: u64,
    },

    #[error("time limit reached")]
    TimeLimit,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input")]
    EmptyInput,

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Errors caused by exhausting a work or time budget rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::TimeLimit)
    }
}
