use thiserror::Error;

use crate::model::SolveResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point index {index} out of range for an instance with {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid instance: {field}: {message}")]
    InvalidInstance { field: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Every hypothesis about the target location was ruled out by the observations.
    #[error("contradictory observations: {0}")]
    Contradictory(String),

    #[error("instance is not collinear: {0}")]
    NotCollinear(String),

    #[error("instance is not uniform: {0}")]
    NotUniform(String),

    #[error("solver refused: {0}")]
    LimitExceeded(String),

    /// The cooperative deadline expired. Anytime solvers attach the best
    /// schedule found so far.
    #[error("time limit exceeded")]
    TimedOut { best: Option<Box<SolveResult>> },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInstance {
            field: field.into(),
            message: message.into(),
        }
    }
}
