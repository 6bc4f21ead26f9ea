use crate::PointId;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("point {0} is already present")]
    DuplicateId(PointId),
    #[error("point {0} not found")]
    NotFound(PointId),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Two structures that must agree (e.g. an octree and the particle set it
    /// indexes) have diverged.
    #[error("consistency violation: {0}")]
    Consistency(String),
    #[error("operation requires a non-empty structure: {0}")]
    EmptyState(String),
    #[error("degenerate input at point {index}: {reason}")]
    Degenerate { index: usize, reason: String },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
