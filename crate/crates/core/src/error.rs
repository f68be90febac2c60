use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("failed to decode image {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("failed to encode image {path}: {reason}")]
    Encode { path: PathBuf, reason: String },

    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("term '{term}' has no supporting ground-truth bins")]
    NoSupport { term: String },

    #[error("ground truth contains no labelled pixels")]
    EmptyGroundTruth,

    #[error("term sets differ: only in first [{only_first}], only in second [{only_second}]")]
    TermSetMismatch {
        only_first: String,
        only_second: String,
    },

    #[error("bin sizes differ: {0} vs {1}")]
    BinSizeMismatch(f64, f64),

    #[error("term '{0}' already exists in the model")]
    DuplicateTerm(String),

    #[error("unknown term '{0}'")]
    UnknownTerm(String),

    #[error("mask of {0} selects no pixels")]
    EmptyMask(String),

    #[error("fitting term '{term}' failed: {source}")]
    Fit {
        term: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
