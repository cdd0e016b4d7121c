use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not found: {0}")]
    Lookup(String),

    /// A model or table violates one of its structural invariants.
    #[error("invariant `{invariant}` violated at {location}: {detail}")]
    Invariant {
        invariant: &'static str,
        location: String,
        detail: String,
    },

    #[error("wrong audit: {0}")]
    WrongAudit(String),

    #[error("total no-show: detection probability for `{0}` is zero")]
    TotalNoShow(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no common hidden variable: {0}")]
    NoWitness(String),

    #[error("internal construction error: {0}")]
    Construction(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invariant(
        invariant: &'static str,
        location: impl Into<String>,
        detail: impl Into<String>,
    ) -> Self {
        Error::Invariant {
            invariant,
            location: location.into(),
            detail: detail.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
