use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] kronsketch_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Stdio(#[from] std::io::Error),
}

impl Error {
    /// The requested problem is too large for a configured cap; the CLI
    /// exits with status 2 for these.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Core(kronsketch_core::Error::OracleCapExceeded { .. })
                | Error::Core(kronsketch_core::Error::SketchTooLarge { .. })
                | Error::Core(kronsketch_core::Error::Overflow)
        )
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
