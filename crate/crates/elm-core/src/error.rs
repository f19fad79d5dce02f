//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by construction, linear algebra, data handling and
/// metric computation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix dimensions must be at least 1x1, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("dimension mismatch in {context}: left is {left}, right is {right}")]
    DimensionMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    #[error("SVD failed to converge within {max_iterations} iterations")]
    SvdNoConvergence { max_iterations: usize },

    #[error("invalid argument for {context}: {message}")]
    InvalidArgument {
        context: &'static str,
        message: String,
    },

    #[error("dataset labels must contain both classes (+1 and -1)")]
    SingleClass,

    #[error("label at sample {index} is {value}; labels must be -1, +1 (or 0/1 in CSV input)")]
    InvalidLabel { index: usize, value: f64 },

    #[error("dataset with {n} samples is too small to split: {reason}")]
    DatasetTooSmall { n: usize, reason: String },

    #[error("CSV row {row} is malformed: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("CSV cell at row {row}, column {col} is not numeric: {value:?}")]
    NonNumericCell {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("label column {column:?} not found in CSV file")]
    MissingLabelColumn { column: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim_mismatch(
        context: &'static str,
        left: impl std::fmt::Display,
        right: impl std::fmt::Display,
    ) -> Self {
        Error::DimensionMismatch {
            context,
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    pub(crate) fn invalid(context: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            context,
            message: message.into(),
        }
    }
}
