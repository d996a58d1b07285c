use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the numerical substrate.
#[derive(Debug, Clone, Error)]
pub enum NumericsError {
    #[error(
        "quadrature did not converge within {subdivisions} subdivisions \
         (estimate {estimate}, error estimate {error:e})"
    )]
    NoConvergence {
        estimate: Complex64,
        error: f64,
        subdivisions: usize,
    },
    #[error("non-finite integrand value at {at}")]
    NonFinite { at: f64 },
    #[error("insufficient decay at truncation radius {radius}: edge magnitude {edge:e} exceeds {limit:e}")]
    Truncation { radius: f64, edge: f64, limit: f64 },
    #[error("invalid numerical parameter: {0}")]
    InvalidSpec(String),
    #[error("range error: {0}")]
    Range(String),
}

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("angle {0} is excluded: detectors and sources must satisfy cos(angle) != 0")]
    ForbiddenAngle(f64),
    #[error("moment order {0} is not supported")]
    MomentOrder(u8),
    #[error("k = {k} exceeds the validity bound alpha = {alpha}")]
    OutOfValidity { k: f64, alpha: f64 },
    #[error("cloak design is not applicable: {0}")]
    Infeasible(String),
    #[error("coating extent {extent} exceeds the coated thickness {ell_c}")]
    Extent { extent: f64, ell_c: f64 },
    #[error("division by a vanishing quantity: {0}")]
    DivisionByZero(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("series did not converge after {terms} terms (last increment {last_increment:e})")]
    SeriesNoConvergence { terms: usize, last_increment: f64 },
    #[error("profile definition: {0}")]
    ProfileDefinition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
