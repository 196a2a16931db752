//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong when assembling data or running a detector.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two datasets disagree on the number of columns.
    DimMismatch { expected: usize, got: usize },
    /// A dataset's row count is incompatible with the requested layout.
    SizeMismatch { detail: String },
    /// A dataset with zero rows or zero columns.
    EmptyDataset,
    /// A non-finite value (NaN or infinity) where real data is required.
    NonFinite { row: usize, col: usize },
    /// A drift magnitude outside the valid range for its scenario.
    InvalidZeta { detail: String },
    /// An operation needs more rows than the input provides.
    TooFewRows { needed: usize, got: usize },
    /// A sequence shorter than the test requires.
    TooFewSamples { needed: usize, got: usize },
    /// Paired samples of unequal length.
    LengthMismatch { left: usize, right: usize },
    /// An empty sample where at least one observation is required.
    EmptySample,
    /// An empty permutation distance collection.
    EmptyPermutations,
    /// Data so degenerate a bandwidth or scale cannot be derived from it.
    DegenerateData,
    /// A detector that needs a distance metric was configured without one.
    MetricMissing,
    /// A training table whose labels are all identical.
    SingleClassTable,
    /// A training table with no examples.
    EmptyTable,
    /// A configuration value flagged with a reason.
    InvalidConfig { detail: String },
    /// Malformed input text (CSV cell, model file line, ...).
    ParseFailure { detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected} columns, got {got}")
            }
            Error::SizeMismatch { detail } => write!(f, "size mismatch: {detail}"),
            Error::EmptyDataset => write!(f, "dataset has no rows or no columns"),
            Error::NonFinite { row, col } => {
                write!(f, "non-finite value at row {row}, column {col}")
            }
            Error::InvalidZeta { detail } => write!(f, "invalid drift magnitude: {detail}"),
            Error::TooFewRows { needed, got } => {
                write!(f, "too few rows: need at least {needed}, got {got}")
            }
            Error::TooFewSamples { needed, got } => {
                write!(f, "too few samples: need at least {needed}, got {got}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "paired samples differ in length: {left} vs {right}")
            }
            Error::EmptySample => write!(f, "empty sample"),
            Error::EmptyPermutations => write!(f, "empty permutation distance collection"),
            Error::DegenerateData => write!(f, "degenerate data: no usable scale"),
            Error::MetricMissing => write!(f, "detector requires a distance metric"),
            Error::SingleClassTable => write!(f, "training table contains a single class"),
            Error::EmptyTable => write!(f, "training table is empty"),
            Error::InvalidConfig { detail } => write!(f, "invalid configuration: {detail}"),
            Error::ParseFailure { detail } => write!(f, "parse failure: {detail}"),
        }
    }
}

impl core::error::Error for Error {}
