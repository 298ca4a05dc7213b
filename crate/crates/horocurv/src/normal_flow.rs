//! The normal flow of a weakly horospherically convex hypersurface,
//! parametrized over its Gauss image, and the closed-form evolution of its
//! curvatures.
//!
//! With support `rho` and spherical gradient `grad rho` at the Gauss point
//! `x`, the leaf at time `t` is
//!
//! ```text
//! phi_t = e^{rho+t}/2 (1 + e^{-2(rho+t)} (1 + |grad rho|^2)) (1, x)
//!         + e^{-(rho+t)} (0, -x + grad rho)
//! ```
//!
//! and the principal curvatures evolve by the Moebius-in-tanh law
//! `kappa^t = (kappa + tanh t) / (1 + kappa tanh t)`. The flow moves each
//! point along the normal geodesic in the direction of growing support, so a
//! geodesic sphere of radius `r` becomes the sphere of radius `r + t` and
//! every curvature drifts toward the horospherical value 1.

use crate::minkowski::SpacetimeVector;
use crate::{Error, Result};

/// Evaluate the flow leaf at time `t` over Gauss point `x` (unit vector in
/// `R^{n+1}`) with support value `rho` and tangential gradient `grad_rho`.
pub fn flow_point(rho: f64, grad_rho: &[f64], x: &[f64], t: f64) -> Result<SpacetimeVector> {
    if grad_rho.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: grad_rho.len() });
    }
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    if (norm2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "Gauss point is not unit: |x|^2 = {norm2}"
        )));
    }
    let dot: f64 = x.iter().zip(grad_rho).map(|(a, b)| a * b).sum();
    if dot.abs() > 1e-10 {
        return Err(Error::GradientNotTangent { dot });
    }
    let w = rho + t;
    let grad2: f64 = grad_rho.iter().map(|v| v * v).sum();
    let a = 0.5 * w.exp() * (1.0 + (-2.0 * w).exp() * (1.0 + grad2));
    let b = (-w).exp();
    let mut coords = Vec::with_capacity(x.len() + 1);
    coords.push(a);
    for i in 0..x.len() {
        coords.push(a * x[i] + b * (-x[i] + grad_rho[i]));
    }
    Ok(SpacetimeVector::new(coords))
}

/// Exact principal-curvature evolution
/// `kappa^t = (kappa + tanh t) / (1 + kappa tanh t)`.
pub fn flow_curvature(kappa: f64, t: f64) -> Result<f64> {
    let th = t.tanh();
    let denom = 1.0 + kappa * th;
    if denom.abs() <= 1e-12 * (1.0 + kappa.abs()) {
        return Err(Error::FocalPole { kappa, t });
    }
    Ok((kappa + th) / denom)
}

/// Exact sectional-curvature evolution
/// `K^t = K (1 - tanh^2 t) / ((1 + kappa_i tanh t)(1 + kappa_j tanh t))`.
pub fn flow_sectional(k_ij: f64, kappa_i: f64, kappa_j: f64, t: f64) -> Result<f64> {
    let th = t.tanh();
    let di = 1.0 + kappa_i * th;
    let dj = 1.0 + kappa_j * th;
    if di.abs() <= 1e-12 * (1.0 + kappa_i.abs()) {
        return Err(Error::FocalPole { kappa: kappa_i, t });
    }
    if dj.abs() <= 1e-12 * (1.0 + kappa_j.abs()) {
        return Err(Error::FocalPole { kappa: kappa_j, t });
    }
    Ok(k_ij * (1.0 - th * th) / (di * dj))
}

/// Flow time together with the evolved principal and pairwise sectional
/// curvatures.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FlowState {
    pub t: f64,
    pub kappa_t: Vec<f64>,
    /// Entries `((i, j), K_ij^t)` over `i < j` (1-based indices).
    pub sectional_t: Vec<((usize, usize), f64)>,
}

impl FlowState {
    /// Evolve principal curvatures to time `t`, filling the sectional values
    /// from the closed-form law and checking mutual consistency
    /// `K^t_ij = kappa^t_i kappa^t_j - 1` to 1e-12.
    pub fn evolve(kappa: &[f64], t: f64) -> Result<FlowState> {
        let kappa_t: Vec<f64> = kappa
            .iter()
            .map(|&k| flow_curvature(k, t))
            .collect::<Result<_>>()?;
        let mut sectional_t = Vec::new();
        for i in 0..kappa.len() {
            for j in (i + 1)..kappa.len() {
                let k_ij = kappa[i] * kappa[j] - 1.0;
                let kt = flow_sectional(k_ij, kappa[i], kappa[j], t)?;
                let direct = kappa_t[i] * kappa_t[j] - 1.0;
                let scale = 1.0 + kt.abs().max(direct.abs());
                if (kt - direct).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "sectional evolution inconsistent at ({i},{j}): {kt} vs {direct}"
                    )));
                }
                sectional_t.push(((i + 1, j + 1), kt));
            }
        }
        Ok(FlowState { t, kappa_t, sectional_t })
    }
}
