//! Minkowski spacetime `R^{1,n+1}`, its three hyperquadrics, and the
//! conversion to the Poincare ball used for probe output.
//!
//! The metric is `<x,y> = -x_0 y_0 + sum_{i>=1} x_i y_i`. Hyperbolic space is
//! the sheet `<x,x> = -1, x_0 > 0`; de Sitter space is `<x,x> = 1`; the
//! positive null cone is `<x,x> = 0, x_0 > 0`.

use crate::tol::TAU_QUAD;
use crate::{Error, Result};

/// A point of `R^{1,n+1}` with coordinates `(x_0, x_1, ..., x_{n+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeVector {
    pub coords: Vec<f64>,
}

impl SpacetimeVector {
    pub fn new(coords: Vec<f64>) -> Self {
        SpacetimeVector { coords }
    }

    pub fn zeros(len: usize) -> Self {
        SpacetimeVector { coords: vec![0.0; len] }
    }

    /// Ambient length `n + 2`.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Hypersurface dimension `n` for which this is an `R^{1,n+1}` vector.
    pub fn surface_dim(&self) -> usize {
        self.coords.len() - 2
    }

    pub fn time(&self) -> f64 {
        self.coords[0]
    }

    /// Spatial part `(x_1, ..., x_{n+1})`.
    pub fn spatial(&self) -> Vec<f64> {
        self.coords[1..].to_vec()
    }

    pub fn scale(&self, s: f64) -> SpacetimeVector {
        SpacetimeVector::new(self.coords.iter().map(|x| x * s).collect())
    }

    pub fn add(&self, other: &SpacetimeVector) -> SpacetimeVector {
        SpacetimeVector::new(
            self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &SpacetimeVector) -> SpacetimeVector {
        SpacetimeVector::new(
            self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn axpy(&self, s: f64, other: &SpacetimeVector) -> SpacetimeVector {
        SpacetimeVector::new(
            self.coords.iter().zip(&other.coords).map(|(a, b)| a + s * b).collect(),
        )
    }
}

/// Which hyperquadric a vector lies on, within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperquadricTag {
    Hyperbolic,
    DeSitter,
    NullCone,
    None,
}

/// Minkowski inner product `-x_0 y_0 + sum x_i y_i`.
pub fn minkowski_inner(x: &SpacetimeVector, y: &SpacetimeVector) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(minkowski_inner_unchecked(x, y))
}

/// Inner product without the dimension check, for hot paths that construct
/// both arguments themselves.
pub fn minkowski_inner_unchecked(x: &SpacetimeVector, y: &SpacetimeVector) -> f64 {
    let mut s = -x.coords[0] * y.coords[0];
    for i in 1..x.coords.len() {
        s += x.coords[i] * y.coords[i];
    }
    s
}

/// `<x,x>`.
pub fn minkowski_norm2(x: &SpacetimeVector) -> f64 {
    minkowski_inner_unchecked(x, x)
}

/// Classify onto the hyperquadrics with absolute tolerance `tau_quad` on
/// `<x,x>`.
pub fn classify_quadric(x: &SpacetimeVector, tau_quad: f64) -> HyperquadricTag {
    let q = minkowski_norm2(x);
    if (q + 1.0).abs() <= tau_quad && x.time() > 0.0 {
        HyperquadricTag::Hyperbolic
    } else if (q - 1.0).abs() <= tau_quad {
        HyperquadricTag::DeSitter
    } else if q.abs() <= tau_quad && x.time() > 0.0 {
        HyperquadricTag::NullCone
    } else {
        HyperquadricTag::None
    }
}

/// Hyperboloid point to Poincare ball: `(x_1,...,x_{n+1}) / (1 + x_0)`.
pub fn to_ball(x: &SpacetimeVector) -> Result<Vec<f64>> {
    if classify_quadric(x, TAU_QUAD) != HyperquadricTag::Hyperbolic {
        return Err(Error::NotHyperbolic { inner: minkowski_norm2(x), x0: x.time() });
    }
    let denom = 1.0 + x.time();
    Ok(x.coords[1..].iter().map(|v| v / denom).collect())
}

/// Poincare ball point to the hyperboloid sheet.
pub fn from_ball(p: &[f64]) -> SpacetimeVector {
    let norm2: f64 = p.iter().map(|x| x * x).sum();
    let denom = 1.0 - norm2;
    let mut coords = Vec::with_capacity(p.len() + 1);
    coords.push((1.0 + norm2) / denom);
    for v in p {
        coords.push(2.0 * v / denom);
    }
    SpacetimeVector::new(coords)
}
