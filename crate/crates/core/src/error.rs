use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot compose fractal numbers with alpha {left} and {right}")]
    AlphaMismatch { left: f64, right: f64 },

    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("unsupported form at offset {offset}: {reason}")]
    UnsupportedForm { offset: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("backend cannot evaluate this integrand: {0}")]
    BackendCapability(String),

    #[error("series did not reach tolerance after {terms} terms (tail bound {tail_bound:e})")]
    SeriesNotConverged { terms: usize, tail_bound: f64 },

    /// A theorem hypothesis could not be certified for the case.
    #[error("case rejected: {0}")]
    Rejected(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
