use std::path::PathBuf;

/// Errors produced by the simulators, the fitting machinery and the file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("iteration index {index} out of range for {iterations} iterations")]
    IterationOutOfRange { index: usize, iterations: usize },

    #[error(
        "custom schedule has {available} phase pairs but {required} iterations were requested"
    )]
    MissingCustomPairs { available: usize, required: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("reflection axis is not normalized (norm {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad caller input rather than runtime failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidProblem(_)
                | Error::IterationOutOfRange { .. }
                | Error::MissingCustomPairs { .. }
                | Error::DimensionMismatch { .. }
                | Error::NonUnitAxis { .. }
                | Error::Unsupported(_)
                | Error::InvalidArgument(_)
        )
    }
}
