use thiserror::Error;

use crate::trace::RefutationTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: arity mismatches, unknown nodes, bad index sets.
    #[error("input error: {0}")]
    Input(String),

    /// The instance does not satisfy the algorithm's entry requirements.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The checker was handed a circuit that computes the target parity.
    #[error("circuit is correct")]
    CircuitIsCorrect,

    /// An exhaustive operation would exceed its configured cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A step the lower-bound argument guarantees did not happen.
    #[error("internal assertion failed: {message}")]
    Bug {
        message: String,
        trace: RefutationTrace,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn bug(msg: impl Into<String>, trace: &RefutationTrace) -> Self {
        Error::Bug {
            message: msg.into(),
            trace: trace.clone(),
        }
    }
}
