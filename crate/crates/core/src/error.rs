use thiserror::Error;

/// Crate-wide error type. Every failure mode named by an operation contract
/// maps onto one of these variants.
#[derive(Debug, Error)]
pub enum Error {
    /// A symmetric matrix expected to be positive definite was not
    /// (leading principal minor or factorization pivot ≤ threshold).
    #[error("matrix not positive definite: {0}")]
    NonPositiveDefinite(String),

    /// Evaluation requested outside the declared chart domain, or a family
    /// is undefined at the point.
    #[error("domain error: {0}")]
    DomainError(String),

    /// A denominator vanished (relative to operand scale) during evaluation.
    #[error("singular evaluation: {0}")]
    SingularEvaluation(String),

    /// A least-squares fit basis was numerically rank-deficient.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A geodesic trace contained no points.
    #[error("empty trace")]
    EmptyTrace,

    /// A metric specification document failed validation.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
