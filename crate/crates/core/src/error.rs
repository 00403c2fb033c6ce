use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FamaError>;

#[derive(Debug, Error)]
pub enum FamaError {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// The Gram matrix `HᴴH` could not be factorized at the requested tolerance.
    #[error("singular Gram matrix (pivot ratio {pivot_ratio:.3e} below tolerance {tolerance:.3e})")]
    SingularGram { pivot_ratio: f64, tolerance: f64 },

    #[error("configuration error for `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown command `{0}`")]
    UnknownCommand(String),

    #[error("{failed} of {total} acceptance criteria failed")]
    Validation { failed: usize, total: usize },
}

impl FamaError {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        FamaError::Domain {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        FamaError::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FamaError::Io {
            path: path.into(),
            source,
        }
    }
}
