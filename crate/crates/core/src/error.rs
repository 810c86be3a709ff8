//! Error type shared by all laboratory modules.

use thiserror::Error;

/// Errors produced by field construction, quadrature, integral functionals,
/// and the finite-element solver.
#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument violated a documented precondition (range, ordering, size).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point or ball left the admissible domain (the ball of radius 4).
    #[error("domain violation: {0}")]
    Domain(String),

    /// A spec string, table file, or config value could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A quadrature rule degenerated (no nodes, or rejection sampling starved).
    #[error("quadrature degeneracy: {0}")]
    Quadrature(String),

    /// An integrand sample was NaN or infinite where a finite value is required.
    #[error("non-finite sample: {0}")]
    NonFiniteSample(String),

    /// The conjugate-gradient solve stopped at the iteration cap.
    #[error(
        "linear solver did not converge: {iterations} iterations, \
         relative residual {residual:.3e} > tolerance {tolerance:.3e}"
    )]
    SolverDiverged {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    /// A coefficient sample failed the pointwise ellipticity bounds.
    #[error("coefficient not elliptic at sampled point {point:?}: {detail}")]
    EllipticityViolation { point: Vec<f64>, detail: String },

    /// An operation requiring a bounded gradient received a field without a
    /// finite gradient bound.
    #[error("unbounded-gradient input rejected: {0}")]
    UnboundedGradient(String),

    /// Underlying I/O failure while reading tables or writing reports.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
