use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-domain input (letters outside the alphabet, empty sequences, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A text or JSON document could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// An operation was called on a value that violates its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A strategy could not be built or could not produce a move.
    #[error("synthesis fault: {0}")]
    Synthesis(String),

    /// The finite solver exceeded its node budget.
    #[error("node budget of {budget} exceeded after {visited} positions ({frontier} still open)")]
    Resource {
        budget: usize,
        visited: usize,
        frontier: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
