//! Default numerical tolerances, centralized so every module and the CLI
//! agree on one set of values.
//!
//! All inputs come from analytic parametrizations evaluated in double
//! precision, so the defaults are calibrated to f64 arithmetic and to the
//! second-order finite-difference stencils used throughout.

/// Absolute tolerance on `<x,x>` when classifying a vector onto one of the
/// hyperquadrics.
pub const TAU_QUAD: f64 = 1e-9;

/// Tolerance for jet invariants (`<eta,eta> = 1`, orthogonality relations).
/// Consistent with `h^2` truncation of the default finite-difference step.
pub const TAU_JET: f64 = 1e-6;

/// Tolerance for eigen-decomposition residuals of the shape operator.
pub const TAU_EIG: f64 = 1e-8;

/// Tolerance for second-derivative (stencil-based) curvature comparisons.
pub const TAU_CURV: f64 = 1e-4;

/// Tolerance for pure-arithmetic identities evaluated in closed form.
pub const TAU_ARITH: f64 = 1e-10;

/// Convergence threshold for the Newton iteration of the curvature-equation
/// solver (max-norm of the discrete residual, scaled by the source size).
pub const TAU_NEWTON: f64 = 1e-10;

/// Distance below which overlapping triangles are classified as coincident
/// sheets of a covering map rather than transversal intersections.
pub const TAU_COINC: f64 = 1e-7;

/// Angular separation (radians) between asymptotic boundary clusters.
pub const THETA_SEP: f64 = 0.1;

/// Default step for central finite differences of chart evaluators.
pub const FD_STEP: f64 = 1e-4;

/// Ball-model norm beyond which a sample counts as escaped to the ideal
/// boundary.
pub const ESCAPE_NORM: f64 = 0.999;

/// Gauss-image angular distance below which two far-apart parameters count
/// as an injectivity violation.
pub const EPS_GAUSS: f64 = 1e-4;

/// Adjustable tolerance bundle passed through the CLI. Fields default to the
/// constants above.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub quad: f64,
    pub jet: f64,
    pub eig: f64,
    pub curv: f64,
    pub newton: f64,
    pub coinc: f64,
    pub theta_sep: f64,
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            quad: TAU_QUAD,
            jet: TAU_JET,
            eig: TAU_EIG,
            curv: TAU_CURV,
            newton: TAU_NEWTON,
            coinc: TAU_COINC,
            theta_sep: THETA_SEP,
            fd_step: FD_STEP,
        }
    }
}
