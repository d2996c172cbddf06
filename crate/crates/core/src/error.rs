use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A lookup outside the stored or committed range.
    #[error("range error: {0}")]
    Range(String),
    /// Input data violates a model invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// Inconsistent run configuration (grids, ranges, horizons).
    #[error("configuration error: {0}")]
    Config(String),
    /// Non-finite values produced during integration.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// No admissible spacing function exists for the requested parameters.
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Range(_) => "range",
            Error::Validation(_) => "validation",
            Error::Config(_) => "configuration",
            Error::Numeric(_) => "numeric",
            Error::Infeasible(_) => "infeasible",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
