use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: expected magic \"VLT1\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u8),

    #[error("length mismatch: header declares {expected} payload bytes, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid dims {dims:?}: {reason}")]
    InvalidDims { dims: Vec<usize>, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("undefined fraction: {0}")]
    UndefinedFraction(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("missing embedding for conditioning id {0:?}")]
    MissingEmbedding(String),

    #[error("analysis error in {domain} domain: {source}")]
    Analysis {
        domain: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse error classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Io,
    Numerical,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. }
            | Error::BadMagic { .. }
            | Error::UnsupportedDtype(_)
            | Error::LengthMismatch { .. } => ErrorClass::Io,
            Error::UndefinedFraction(_) | Error::UndefinedRatio(_) | Error::Numerical(_) => {
                ErrorClass::Numerical
            }
            Error::Analysis { source, .. } => source.class(),
            Error::InvalidDims { .. }
            | Error::Dimension(_)
            | Error::Parameter(_)
            | Error::Refused(_)
            | Error::MissingEmbedding(_) => ErrorClass::Validation,
        }
    }
}
