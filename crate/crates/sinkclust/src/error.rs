use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sinkclust_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn parse(path: &Path, detail: impl Into<String>) -> Self {
        Error::Parse { path: path.to_path_buf(), detail: detail.into() }
    }

    /// 1 for runtime, IO and numeric failures; 2 for usage and validation errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Core(sinkclust_core::Error::Argument(_) | sinkclust_core::Error::Shape(_)) => 2,
            Error::Core(sinkclust_core::Error::Numeric(_)) | Error::Io { .. } | Error::Parse { .. } => 1,
        }
    }
}
