use std::path::PathBuf;

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file: bad magic, unsupported version, truncated payload.
    #[error("format error: {0}")]
    Format(String),

    /// Well-formed container with invalid contents (non-finite values,
    /// ragged rows, empty sets, zero-norm rows).
    #[error("data error: {0}")]
    Data(String),

    /// Dimension or code-length mismatch between operands.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("training diverged at step {step}: objective is not finite")]
    Divergence { step: usize },

    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
