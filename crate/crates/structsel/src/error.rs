use std::path::PathBuf;

use structsel_core::Error as CoreError;

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
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 usage, 3 numerical failure, 4 budget refusal,
    /// 1 anything else (IO, malformed files).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Core(e) => match e {
                CoreError::BudgetExceeded { .. } => 4,
                CoreError::NonFinite
                | CoreError::NotSymmetric { .. }
                | CoreError::NegativeEigenvalue { .. }
                | CoreError::SingularInterpolation { .. }
                | CoreError::SingularPosterior => 3,
                CoreError::MissingData(_) => 1,
                _ => 2,
            },
            _ => 1,
        }
    }
}
