use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
    #[error("self-test failed: {0}")]
    SelfTest(String),
}

impl AppError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Io { .. } | AppError::Runtime(_) => 3,
            AppError::SelfTest(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<rankbreak_core::Error> for AppError {
    fn from(e: rankbreak_core::Error) -> Self {
        match e {
            rankbreak_core::Error::Config(msg) => AppError::Config(msg),
            other => AppError::Runtime(other.to_string()),
        }
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Runtime(format!("csv: {e}"))
    }
}

pub type AppResult<T> = Result<T, AppError>;
