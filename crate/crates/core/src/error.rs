use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {found} values but grid holds {expected} cells")]
    SizeMismatch { expected: usize, found: usize },

    #[error("non-finite value {value} at cell {cell}")]
    NonFinite { cell: usize, value: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid omega {omega}: {reason}")]
    InvalidOmega { omega: f64, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root finder failed: {0}")]
    ConvergenceFailure(String),

    #[error("free-energy flow diverged at cell {cell} (value {value}, radicand {radicand:e})")]
    Divergence { cell: usize, value: f64, radicand: f64 },

    #[error("|phi| exceeded {limit} at cell {cell} (value {value:e})")]
    Blowup { cell: usize, value: f64, limit: f64 },

    #[error("reference field has zero l2 norm")]
    ZeroReference,

    #[error("unknown scheme id `{0}`")]
    UnknownScheme(String),

    #[error("malformed field header: {0}")]
    MalformedHeader(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI, one per error category.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } => 3,
            Error::MalformedHeader(_) | Error::SizeMismatch { .. } | Error::NonFinite { .. } => 4,
            Error::Config(_) | Error::UnknownScheme(_) | Error::InvalidParameter(_) => 2,
            Error::InvalidOmega { .. } => 5,
            Error::Divergence { .. } | Error::Blowup { .. } => 6,
            Error::ConvergenceFailure(_) => 7,
            Error::InvalidGrid(_) | Error::GridMismatch | Error::ZeroReference => 8,
        }
    }
}
