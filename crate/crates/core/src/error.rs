use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed group string or other textual input.
    #[error("parse error: {0}")]
    Parse(String),

    /// A dimension or combinatorial count exceeds the configured cap.
    #[error("size error: {what} = {value} exceeds cap {cap}")]
    Size {
        what: String,
        value: usize,
        cap: usize,
    },

    /// Inputs violate an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn size(what: impl Into<String>, value: usize, cap: usize) -> Self {
        Error::Size {
            what: what.into(),
            value,
            cap,
        }
    }
}
