use thiserror::Error;

/// Errors raised by the surrogate toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("ill-conditioned training system (condition estimate {condition:.3e}) for {context}")]
    IllConditioned { condition: f64, context: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{family} is undefined at {point:?}: {reason}")]
    DomainEvaluation {
        family: &'static str,
        point: Vec<f64>,
        reason: &'static str,
    },

    #[error("degenerate metric: {0}")]
    DegenerateMetric(&'static str),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("malformed model document: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
