use std::path::PathBuf;

use phasetour_core::Error as CoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error(
        "provenance check failed for {path}: expected id {expected}, content hashes to {actual}"
    )]
    Provenance {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("provenance check failed: {0}")]
    Mismatch(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{what} is infeasible: {detail}")]
    TooLarge { what: String, detail: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) => 2,
            Error::Core(
                CoreError::InvalidArgument(_)
                | CoreError::IndexOutOfRange { .. }
                | CoreError::InvalidPermutation(_),
            ) => 2,
            Error::TooLarge { .. } => 3,
            Error::Core(CoreError::SizeLimit { .. } | CoreError::Unattainable { .. }) => 3,
            Error::Provenance { .. } | Error::Mismatch(_) => 4,
            _ => 1,
        }
    }
}
