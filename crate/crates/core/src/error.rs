use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tap count {0}: must be odd and at least 3")]
    InvalidTapCount(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("noise covariance is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("degenerate observation geometry at code phase {code_phase} chips")]
    DegenerateGeometry { code_phase: f64 },

    #[error("lag {0} chips is not on the tap grid")]
    LagNotOnGrid(f64),

    #[error("tap vector has {got} values, grid has {expected} taps")]
    TapCountMismatch { expected: usize, got: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: unsupported format version {found} (expected {expected})")]
    Version {
        path: PathBuf,
        found: String,
        expected: u32,
    },

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

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
    /// Short machine-parseable category used by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidTapCount(_) | Error::InvalidParameter(_) | Error::Config(_) => "config",
            Error::NotPositiveDefinite { .. } | Error::DegenerateGeometry { .. } => "numeric",
            Error::LagNotOnGrid(_) | Error::TapCountMismatch { .. } => "input",
            Error::EmptyDataset => "empty-dataset",
            Error::Schedule(_) => "schedule",
            Error::Parse { .. } => "parse",
            Error::Version { .. } => "version",
            Error::AxisMismatch(_) => "axis-mismatch",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
