use thiserror::Error;

/// Errors produced by every fallible operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} index {index} out of bounds (len {len})")]
    OutOfBounds {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error(
        "conditioning on true winner {winner} was never satisfied in {trials} trials \
         (observed winners: {observed:?})"
    )]
    ConditioningStarved {
        winner: usize,
        trials: usize,
        observed: Vec<usize>,
    },

    #[error("sizing: {0}")]
    Sizing(String),

    #[error("ingest failed: {message}")]
    Ingest { message: String, rows: Vec<String> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than by a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput { .. }
                | Error::DimensionMismatch(_)
                | Error::OutOfBounds { .. }
                | Error::Precondition(_)
                | Error::Sizing(_)
                | Error::Ingest { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
