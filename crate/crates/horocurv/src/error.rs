//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point does not lie on the hyperbolic sheet (<x,x> = {inner}, x0 = {x0})")]
    NotHyperbolic { inner: f64, x0: f64 },

    #[error("degenerate tangent frame: first-form condition number {cond:.3e}")]
    DegenerateFrame { cond: f64 },

    #[error("shape operator asymmetry {residual:.3e} exceeds tolerance {tol:.3e}")]
    NonSymmetric { residual: f64, tol: f64 },

    #[error("light cone map has nonpositive time component {psi0}; orientation inconsistent")]
    OrientationInconsistent { psi0: f64 },

    #[error("curvature pole: kappa = {kappa} is at the -1 singularity")]
    CurvaturePole { kappa: f64 },

    #[error("focal pole: 1 + kappa tanh t vanishes (kappa = {kappa}, t = {t})")]
    FocalPole { kappa: f64, t: f64 },

    #[error("gradient not tangent to the sphere (<x, grad> = {dot:.3e})")]
    GradientNotTangent { dot: f64 },

    #[error("parameter point outside chart domain (axis {axis}, value {value})")]
    OutOfDomain { axis: usize, value: f64 },

    #[error("grid too small: need at least {need} points with margin, got {got}")]
    GridTooSmall { need: usize, got: usize },

    #[error("radius {r} outside grid range [{r_min}, {r_max}]")]
    RadiusOutOfRange { r: f64, r_min: f64, r_max: f64 },

    #[error("evaluation point outside source grid")]
    InterpolationMiss,

    #[error("Newton iteration diverged after {iterations} steps (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("linearization is singular and cannot be factored")]
    SingularLinearization,

    #[error("singular matrix in linear solve")]
    SingularMatrix,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("samples do not escape to the ideal boundary (max ball norm {max_norm:.4})")]
    EscapeInsufficient { max_norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("malformed grid file: {0}")]
    GridFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit status the CLI maps this error to: usage errors exit 2,
    /// numerical failures exit 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::InvalidParameter(_) => 2,
            _ => 1,
        }
    }
}
