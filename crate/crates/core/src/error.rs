use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid RLE: {0}")]
    Rle(String),

    #[error("pair {pair}: {}", join_violations(.violations))]
    Constraint { pair: String, violations: Vec<Violation> },

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),

    #[error("mask has no positive pixels")]
    EmptyMask,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("tracker did not answer within {0:?}")]
    Timeout(Duration),

    #[error("tracker failed: {0}")]
    Driver(String),

    #[error("attribute {attribute} unavailable: {reason}")]
    AttributeUnavailable { attribute: String, reason: String },

    #[error("image error on {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("no closed-form expectation: {0}")]
    NoClosedForm(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

fn join_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
