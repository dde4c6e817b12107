use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the numerical pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("normalization violated: {0}")]
    Normalization(String),

    #[error("truncation too short: need {needed} coefficients, have {available}")]
    Truncation { needed: usize, available: usize },

    #[error("matrix is not complex symmetric (max asymmetry {0:.3e})")]
    Symmetry(f64),

    #[error("argument outside its domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singularity at {0}")]
    Singularity(Complex64),

    #[error("hyperbolic norm appears unbounded (last value {0:.3e})")]
    UnboundedNorm(f64),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("pole of the reconstructed map near {0}")]
    Pole(Complex64),

    #[error("Beltrami coefficient has sup norm {0} >= 1")]
    NotQuasiconformal(f64),

    #[error("Neumann iteration did not converge (residual {residual:.3e} after {iterations} steps)")]
    Convergence { residual: f64, iterations: usize },

    #[error("sampling circle of radius {0} meets the support of the Beltrami coefficient")]
    NotConformalThere(f64),

    #[error("quadratic has no positive root")]
    NoRoot,

    #[error("quadrature check failed: {0}")]
    Quadrature(String),

    #[error("io: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
