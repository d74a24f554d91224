use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pair index {index} out of range (K = {count})")]
    PairIndex { index: usize, count: usize },

    #[error(
        "cannot place {requested} access points: only {available} grid intersections available"
    )]
    Capacity { requested: usize, available: usize },

    #[error("no valid position found after {attempts} attempts")]
    PlacementExhausted { attempts: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by an unrealizable network geometry rather
    /// than malformed input.
    pub fn is_infeasible_geometry(&self) -> bool {
        matches!(
            self,
            Error::Capacity { .. } | Error::PlacementExhausted { .. }
        )
    }
}
