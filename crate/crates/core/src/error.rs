use std::path::PathBuf;

/// Errors raised by the simulator and its building blocks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A model was evaluated outside its range of validity.
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear system had no usable solution.
    #[error("singular system: {0}")]
    Singular(String),

    /// A filter handed to the bias/variance step was not an MMSE filter.
    #[error("filter is not MMSE: Im(w^H h) = {imag:e} for Re = {real:e}")]
    NonMmseFilter { real: f64, imag: f64 },

    #[error("LDPC construction failed: {0}")]
    Construction(String),

    #[error("invalid alist data: {0}")]
    Alist(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
