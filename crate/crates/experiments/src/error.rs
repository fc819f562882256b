use std::path::PathBuf;

use thiserror::Error;

/// Failures of the experiment runner, grouped by process exit code.
#[derive(Debug, Error)]
pub enum ExpError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ExpError {
    /// 2 for configuration errors, 3 for data and I/O errors, 4 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config(_) => 2,
            ExpError::Data(_) | ExpError::Parse { .. } | ExpError::Io { .. } => 3,
            ExpError::Numerical(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ExpError::Io { path: path.into(), source }
    }
}

impl From<cosvr_core::Error> for ExpError {
    fn from(e: cosvr_core::Error) -> Self {
        use cosvr_core::Error as E;
        match e {
            E::Config(_) | E::Range(_) => ExpError::Config(e.to_string()),
            E::Dimension { .. } | E::Data(_) | E::Format(_) | E::DomainEvaluation { .. } => {
                ExpError::Data(e.to_string())
            }
            E::IllConditioned { .. } | E::DegenerateMetric(_) => ExpError::Numerical(e.to_string()),
        }
    }
}

pub type Result<T, E = ExpError> = std::result::Result<T, E>;
