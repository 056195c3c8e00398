use std::path::PathBuf;

/// Errors surfaced by the pipeline stages.
///
/// `InvalidArgument` covers caller mistakes (bad parameters, mismatched
/// dimensions), `Data` covers defects in the input files themselves.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("missing image file: {0}")]
    MissingImage(PathBuf),

    #[error("mask/image size mismatch for image '{image_id}' (class '{class}')")]
    MaskSizeMismatch { image_id: String, class: String },

    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0}")]
    Data(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed or missing input data (as opposed
    /// to caller/API misuse). The CLI maps these to a distinct exit code.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_) | Error::DimensionMismatch { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
