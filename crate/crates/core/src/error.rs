use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{dividend} is not divisible by {divisor}")]
    NotDivisible { dividend: String, divisor: String },

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("B-spline order must be even and at least 2, got {0}")]
    InvalidOrder(u32),

    #[error("shift index {s} outside I({k}) = 0..{len}")]
    IndexOutOfRange { k: u32, s: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mask does not define a quasi-interpolant: {0}")]
    NotAQuasiInterpolant(String),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("{} required sample point(s) missing, first: {:?}", .points.len(), .points.first())]
    MissingSamples { points: Vec<Vec<f64>> },

    #[error("quadrature resolution {resolution} is below the aliasing guard {required}")]
    ResolutionTooLow { resolution: usize, required: usize },

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}
