use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed container data. `token` names the offending header token when there is one.
    #[error("format error: {message}{}", token.as_ref().map(|t| format!(" (token `{t}`)")).unwrap_or_default())]
    Format {
        message: String,
        token: Option<String>,
    },

    #[error("truncated payload in frame {frame}: expected {expected} bytes, got {got}")]
    Truncated {
        frame: usize,
        expected: usize,
        got: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "block ({x}, {y}) displaced by ({dx}, {dy}) leaves the {width}x{height} reference frame"
    )]
    OutOfBounds {
        x: usize,
        y: usize,
        dx: i32,
        dy: i32,
        width: usize,
        height: usize,
    },

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("insufficient motion: {available} motion blocks available, {required} required")]
    InsufficientMotion { available: usize, required: usize },

    #[error("no frame in the sequence has enough motion blocks to carry the watermark")]
    NoCapacity,

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Capacity,
    Io,
    Other,
}

impl Error {
    pub(crate) fn format(message: impl Into<String>) -> Self {
        Error::Format {
            message: message.into(),
            token: None,
        }
    }

    pub(crate) fn bad_token(message: impl Into<String>, token: impl Into<String>) -> Self {
        Error::Format {
            message: message.into(),
            token: Some(token.into()),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Shape(_) | Error::Domain(_) => ErrorClass::Config,
            Error::Capacity(_) | Error::InsufficientMotion { .. } | Error::NoCapacity => {
                ErrorClass::Capacity
            }
            Error::Io { .. } | Error::Format { .. } | Error::Truncated { .. } => ErrorClass::Io,
            Error::Stage { source, .. } => source.class(),
            Error::OutOfBounds { .. } | Error::Integrity(_) => ErrorClass::Other,
        }
    }
}
