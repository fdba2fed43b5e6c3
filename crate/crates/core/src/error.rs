//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// File could not be opened, read or written.
    #[error("file error: {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Input violates the expected schema (unknown label code, missing column).
    #[error("schema error at row {row}: {message}")]
    Schema { row: usize, message: String },

    /// A caller-supplied argument is out of contract.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A file's wire format is malformed at a specific line.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// The entity-linker backend is unavailable or failed.
    #[error("entity linker error: {0}")]
    Linker(String),

    /// An operation was invoked on an object in the wrong state.
    #[error("invalid state: {0}")]
    State(String),

    /// The model does not expose the capability the operation needs.
    #[error("capability not available: {0}")]
    Capability(String),
}

impl Error {
    pub fn file(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    pub fn schema(row: usize, message: impl Into<String>) -> Self {
        Error::Schema {
            row,
            message: message.into(),
        }
    }

    pub fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
