use std::path::PathBuf;

use crate::powell::OptimizationTrace;

/// Errors produced by the core operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("unknown {kind} '{name}'")]
    Lookup { kind: &'static str, name: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    #[error("unsupported config format_version {found} (this build reads version {supported})")]
    Schema { found: u64, supported: u64 },

    /// The optimizer saw a non-finite objective value. The trace holds all
    /// iterations completed before the abort.
    #[error("objective returned a non-finite value at weights {weights:?}")]
    NonFiniteObjective {
        weights: Vec<f64>,
        trace: Box<OptimizationTrace>,
    },
}

impl Error {
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
