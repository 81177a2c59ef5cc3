use thiserror::Error;

/// Errors raised by the numerical kernels and the three structure modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix exponential overflow (1-norm {norm:e})")]
    Overflow { norm: f64 },

    #[error("matrix is singular: pivot {pivot:e} below threshold {threshold:e}")]
    Singular { pivot: f64, threshold: f64 },

    #[error("integration diverged after t = {last_time}")]
    Divergence { last_time: f64 },

    #[error("point {point:?} left the domain{}", .time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    OutOfDomain { point: Vec<f64>, time: Option<f64> },

    #[error("geodesic from a = {a:?} does not reach t = 1 (stopped at t = {reached})")]
    NotInA0 { a: Vec<f64>, reached: f64 },

    #[error("1-form is not anchored: |rho(phi) - dtau| = {deviation:e} exceeds {tolerance:e}")]
    NotAnchored { deviation: f64, tolerance: f64 },

    #[error("base curve is not an integral curve of rho(xi): deviation {deviation:e}")]
    InconsistentBase { deviation: f64 },

    #[error("antisymmetry violated: {0}")]
    NotAntisymmetric(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
