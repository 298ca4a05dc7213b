//! Hypersurface geometry in hyperbolic space through the hyperbolic Gauss map.
//!
//! The library works in the hyperboloid model: hyperbolic space `H^{n+1}` is
//! the unit timelike hyperquadric of Minkowski spacetime `R^{1,n+1}`. For an
//! immersed oriented hypersurface with unit normal, the light cone map
//! `psi = phi - eta` lands in the positive null cone and factors as
//! `psi = e^rho (1, G)`, where `G` is the hyperbolic Gauss map and `rho` the
//! horospherical support function. Pulling the Minkowski metric back along
//! `psi` gives the horospherical metric `g_h = e^{2 rho} G* g_{S^n}`, whose
//! curvature is an algebraic function of the principal curvatures.
//!
//! Modules:
//! - [`minkowski`]: spacetime vectors, hyperquadric classification, Poincare
//!   ball conversion.
//! - [`surface`]: charts, immersion jets, shape operators, principal
//!   curvatures, pointwise convexity classification.
//! - [`horospherical`]: light cone map, support function, horospherical
//!   metric and its curvature tensors, the Gaussian curvature equation, and
//!   the planar P0 decomposition.
//! - [`normal_flow`]: the normal flow and its exact curvature evolution.
//! - [`conformal`]: planar conformal metrics, curvature, inversion, circle
//!   averages, growth exponents, and a Newton solver for the curvature
//!   equation.
//! - [`catalog`]: closed-form model surfaces and metrics used as ground
//!   truth.
//! - [`embed_probe`]: meshing, self-intersection detection, Gauss-map
//!   injectivity probing, asymptotic boundary clustering.
//! - [`cli`]: command line front end.

pub mod catalog;
pub mod cli;
pub mod conformal;
pub mod embed_probe;
mod error;
pub mod horospherical;
pub mod linalg;
pub mod mesh;
pub mod minkowski;
pub mod normal_flow;
pub mod pde;
pub mod plane_field;
pub mod report;
pub mod sphere_field;
pub mod surface;
pub mod tol;

pub use error::{Error, Result};
