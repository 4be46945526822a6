use thiserror::Error;

/// Errors raised by the calculus and its configuration layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A size parameter exceeds the supported cap.
    #[error("size error: {what} = {value} exceeds the limit {limit}")]
    Size {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("an atom already sits at the requested position")]
    AtomClash,

    #[error("no atom at the requested position")]
    AtomMissing,

    /// A measure, window or function failed its construction invariants.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Malformed configuration text.
    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn config(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            column,
            message: msg.into(),
        }
    }
}
