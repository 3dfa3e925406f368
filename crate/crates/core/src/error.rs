use std::path::PathBuf;

/// Errors raised by corpus handling, ranking, evaluation and the cost model.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("duplicate document id: {0}")]
    DuplicateDocId(String),

    #[error("unknown document id: {0}")]
    UnknownDocId(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("fold plan does not partition the query set: {0}")]
    FoldMismatch(String),

    #[error("not an index artifact (bad magic header)")]
    BadMagic,

    #[error("unsupported index artifact version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error("malformed index artifact")]
    Encoding(#[from] bincode::Error),

    #[error("i/o error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

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

pub type Result<T, E = Error> = std::result::Result<T, E>;
