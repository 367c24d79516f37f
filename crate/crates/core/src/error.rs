use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("|Im z| = {imag} is outside the analyticity strip of width {rho}")]
    OutsideStrip { imag: f64, rho: f64 },

    #[error("energy {energy} is numerically an eigenvalue of H on [{a}, {b}]")]
    Singular { a: i64, b: i64, energy: f64 },

    #[error("zero of f within {distance:.3e} of the contour of radius {radius} (after {attempts} radius retries)")]
    ContourNearZero { radius: f64, distance: f64, attempts: usize },

    #[error("winding number {value} is not within 0.1 of an integer")]
    NonIntegerWinding { value: f64 },

    #[error("resultant routes disagree: sylvester = {sylvester}, roots = {roots}")]
    ResultantDisagreement { sylvester: String, roots: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("scale {scale} exceeds the cap {cap}")]
    ScaleCap { scale: u64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
