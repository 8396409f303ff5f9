use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed datatype: {0}")]
    MalformedType(String),

    #[error("bad layout parameters: {0}")]
    BadParams(String),

    #[error("region too small: need {needed} bytes, have {available}")]
    RegionTooSmall { needed: usize, available: usize },

    #[error("packed buffer size mismatch: expected {expected} bytes, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("layouts differ between guideline sides: {0}")]
    LayoutMismatch(String),

    #[error("transport unavailable: {0}")]
    TransportUnavailable(String),

    #[error("peer closed the connection")]
    PeerClosed,

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("{context}: {source}")]
    Case {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Case {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping any `Case` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Case { source, .. } => source.root(),
            other => other,
        }
    }
}
