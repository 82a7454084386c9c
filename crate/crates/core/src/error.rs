use thiserror::Error;

/// Errors raised by the numerical and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series diverges: {0}")]
    Divergence(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("truncation failure: {what} did not reach tolerance within {max_terms} terms")]
    Truncation { what: &'static str, max_terms: usize },

    #[error("quadrature failure: estimate {estimate:e} with error {error:e} above tolerance")]
    Quadrature { estimate: f64, error: f64 },

    #[error("degenerate path: {0}")]
    Degenerate(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Divergence(_) => "divergence",
            Error::Pole(_) => "pole",
            Error::Truncation { .. } => "truncation",
            Error::Quadrature { .. } => "quadrature",
            Error::Degenerate(_) => "degenerate",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Assumption(_) => "assumption",
            Error::Invalid(_) => "invalid",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
