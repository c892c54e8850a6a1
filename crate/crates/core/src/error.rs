use thiserror::Error;

/// Errors raised by kernel algebra, cochain evaluation and index computations.
#[derive(Debug, Error)]
pub enum Error {
    /// A product or cutoff does not fit the finite window.
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    /// A structural invariant of an input value does not hold.
    #[error("invariant violated: {0}")]
    Invariant(String),
    /// Incompatible dimensions or geometries.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// Wrong number of cochain arguments.
    #[error("cochain of degree {degree} needs {} arguments, got {got}", degree + 1)]
    Arity { degree: usize, got: usize },
    /// The boundary operator has spectrum inside the required gap.
    #[error("spectral gap violated: {0}")]
    Gap(String),
    /// A limit, quadrature or fixed-point iteration did not converge.
    #[error("not converged: {0}")]
    NotConverged(String),
    /// Singular solve or failed decomposition.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
