//! Planar conformal metrics `e^{2u} |dz|^2` on polar log-radius grids:
//! Gaussian curvature, the inversion transform, circle averages, growth
//! exponents, total curvature, and the flat-case support function.
//!
//! Grids are log-spaced in radius and uniform in angle. Writing `s = log r`,
//! the flat Laplacian becomes `Delta u = e^{-2s} (u_ss + u_tt)`, so the
//! whole module works on a uniform `(s, theta)` rectangle with a periodic
//! angle. Quadrature is trapezoidal in `theta` (exact mean over the periodic
//! samples) and midpoint-style in `log r` with half-weight end cells.

use std::sync::Arc;

use crate::plane_field::{PlaneField, PlaneGrid, PlaneJets};
use crate::{Error, Result};

type Radial = dyn Fn(f64) -> f64 + Send + Sync;

/// Log-spaced polar grid: `n_r` radius nodes covering `[r_min, r_max]`
/// geometrically (endpoints included), `n_theta` uniform angles on `[0, 2pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl PolarGrid {
    pub fn new(r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && n_r >= 4 && n_theta >= 4) {
            return Err(Error::InvalidParameter(format!(
                "bad polar grid: r in [{r_min}, {r_max}], {n_r} x {n_theta}"
            )));
        }
        Ok(PolarGrid { r_min, r_max, n_r, n_theta })
    }

    pub fn s_min(&self) -> f64 {
        self.r_min.ln()
    }

    pub fn s_max(&self) -> f64 {
        self.r_max.ln()
    }

    pub fn ds(&self) -> f64 {
        (self.s_max() - self.s_min()) / (self.n_r as f64 - 1.0)
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n_theta as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s_min() + i as f64 * self.ds()
    }

    pub fn r(&self, i: usize) -> f64 {
        self.s(i).exp()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta()
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of radius node `i` in `ds` units (half cells at the
    /// ends).
    pub fn w_s(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_r {
            0.5 * self.ds()
        } else {
            self.ds()
        }
    }
}

/// Sampled conformal factor `u` (and optional curvature `K`) on a polar
/// grid, with optional radial closed forms for tighter derivative accuracy.
#[derive(Clone)]
pub struct PlaneConformalGrid {
    pub grid: PolarGrid,
    pub u: Vec<f64>,
    pub k: Option<Vec<f64>>,
    /// Closed-form radial profile `(u, du/ds, d2u/ds2)` when the metric is
    /// rotationally symmetric.
    pub radial: Option<(Arc<Radial>, Arc<Radial>, Arc<Radial>)>,
    /// Flagged when sampled curvature is signed below `-tau` (outside the
    /// nonnegatively-curved hypotheses).
    pub incomplete_flag: bool,
}

impl PlaneConformalGrid {
    pub fn from_fn(grid: PolarGrid, f: &(dyn Fn(f64, f64) -> f64 + Sync)) -> Self {
        let mut u = Vec::with_capacity(grid.len());
        for i in 0..grid.n_r {
            for j in 0..grid.n_theta {
                u.push(f(grid.r(i), grid.theta(j)));
            }
        }
        PlaneConformalGrid { grid, u, k: None, radial: None, incomplete_flag: false }
    }

    pub fn without_closed_forms(mut self) -> Self {
        self.radial = None;
        self
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.idx(i, j)]
    }
}

/// Gaussian curvature `K = -e^{-2u} Delta u` of `e^{2u}|dz|^2` on the grid.
/// Radial closed forms are used when attached; otherwise second-order
/// stencils in `(s, theta)` fill the radial interior (ends carry one-sided
/// values copied from their neighbors' stencil row being unavailable, so the
/// two end rows are NaN in stencil mode).
pub fn plane_curvature(field: &PlaneConformalGrid) -> Vec<f64> {
    let g = &field.grid;
    let mut k = vec![f64::NAN; g.len()];
    if let Some((u, _, uss)) = &field.radial {
        // Radial profile: theta terms vanish and Delta u = e^{-2s} u_ss
        // (the log substitution absorbs the u_r / r term).
        for i in 0..g.n_r {
            let s = g.s(i);
            let lap = (-2.0 * s).exp() * uss(s);
            let val = -(-2.0 * u(s)).exp() * lap;
            for j in 0..g.n_theta {
                k[g.idx(i, j)] = val;
            }
        }
        return k;
    }
    let ds2 = g.ds() * g.ds();
    let dt2 = g.dtheta() * g.dtheta();
    for i in 1..g.n_r - 1 {
        let s = g.s(i);
        for j in 0..g.n_theta {
            let jp = (j + 1) % g.n_theta;
            let jm = (j + g.n_theta - 1) % g.n_theta;
            let c = field.u[g.idx(i, j)];
            let uss = (field.u[g.idx(i + 1, j)] - 2.0 * c + field.u[g.idx(i - 1, j)]) / ds2;
            let utt = (field.u[g.idx(i, jp)] - 2.0 * c + field.u[g.idx(i, jm)]) / dt2;
            let lap = (-2.0 * s).exp() * (uss + utt);
            k[g.idx(i, j)] = -(-2.0 * c).exp() * lap;
        }
    }
    k
}

/// Max residual of the curvature identity `-Delta u = K e^{2u}` over the
/// stencil interior, when a curvature field is stored alongside `u`.
pub fn curvature_identity_residual(field: &PlaneConformalGrid) -> Option<f64> {
    let stored = field.k.as_ref()?;
    let computed = plane_curvature(field);
    let mut worst = 0.0f64;
    for (c, s) in computed.iter().zip(stored) {
        if c.is_finite() {
            worst = worst.max((c - s).abs());
        }
    }
    Some(worst)
}

/// Inversion `v(z~) = u(z~/|z~|^2) - 2 log |z~|` on the mirrored annulus
/// `[1/r_max, 1/r_min]`. Node-exact on the log grid (pure index reversal),
/// so the involution costs no interpolation.
pub fn invert(field: &PlaneConformalGrid) -> Result<PlaneConformalGrid> {
    let g = &field.grid;
    let grid = PolarGrid::new(1.0 / g.r_max, 1.0 / g.r_min, g.n_r, g.n_theta)?;
    let mut u = vec![0.0; grid.len()];
    for i in 0..grid.n_r {
        let s_t = grid.s(i);
        let src = g.n_r - 1 - i;
        for j in 0..grid.n_theta {
            u[grid.idx(i, j)] = field.u[g.idx(src, j)] - 2.0 * s_t;
        }
    }
    let radial = field.radial.as_ref().map(|(u0, us0, uss0)| {
        let u0 = u0.clone();
        let us0 = us0.clone();
        let uss0 = uss0.clone();
        let u1: Arc<Radial> = Arc::new(move |s: f64| u0(-s) - 2.0 * s);
        let us1: Arc<Radial> = Arc::new(move |s: f64| -us0(-s) - 2.0);
        let uss1: Arc<Radial> = Arc::new(move |s: f64| uss0(-s));
        (u1, us1, uss1)
    });
    Ok(PlaneConformalGrid { grid, u, k: None, radial, incomplete_flag: field.incomplete_flag })
}

/// Circle average `(1/2pi) integral of u(r cos t, r sin t) dt` by the
/// periodic trapezoid rule, with linear interpolation in `log r` between
/// grid radii.
pub fn circle_average(field: &PlaneConformalGrid, r: f64) -> Result<f64> {
    let g = &field.grid;
    if r < g.r_min * (1.0 - 1e-12) || r > g.r_max * (1.0 + 1e-12) {
        return Err(Error::RadiusOutOfRange { r, r_min: g.r_min, r_max: g.r_max });
    }
    let s = r.ln();
    let x = ((s - g.s_min()) / g.ds()).clamp(0.0, g.n_r as f64 - 1.0);
    let i0 = (x.floor() as usize).min(g.n_r - 1);
    let i1 = (i0 + 1).min(g.n_r - 1);
    let w = x - i0 as f64;
    let mean = |i: usize| -> f64 {
        let row = &field.u[g.idx(i, 0)..g.idx(i, 0) + g.n_theta];
        row.iter().sum::<f64>() / g.n_theta as f64
    };
    Ok((1.0 - w) * mean(i0) + w * mean(i1))
}

/// Growth diagnostics of a conformal factor.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GrowthReport {
    /// Least-squares slope of `-u_bar(r)` against `log r` over the top
    /// decade.
    pub m_fit: f64,
    /// Total curvature `(1/2pi) integral K e^{2u} dA` over the sampled
    /// annulus.
    pub m_flux: f64,
    /// Flux value read from the boundary derivative `-r u_bar'(r)` at the
    /// outer edge.
    pub m_boundary: f64,
    /// Fit window in radius.
    pub r_window: (f64, f64),
    pub fit_vs_flux: f64,
    pub boundary_vs_flux: f64,
    /// True when sampled `K` dips below `-1e-10` somewhere (the growth
    /// hypotheses need `K >= 0`).
    pub negative_curvature_flag: bool,
    /// Worst decrease of the cumulative flux `r -> -r u_bar'(r)`, which is
    /// nondecreasing for `K >= 0`.
    pub flux_monotonicity_defect: f64,
}

/// Estimate the growth exponent of `u` two ways: slope fit of the circle
/// average over the top decade, and total-curvature flux.
pub fn growth_exponent(field: &PlaneConformalGrid) -> Result<GrowthReport> {
    let g = &field.grid;
    if g.r_max / g.r_min < 1e3 {
        return Err(Error::InvalidParameter(format!(
            "growth fit needs r_max/r_min >= 1e3, got {}",
            g.r_max / g.r_min
        )));
    }
    let k = match &field.k {
        Some(k) => k.clone(),
        None => plane_curvature(field),
    };
    let mut negative_curvature_flag = false;
    // Flux integrand K e^{2u} e^{2s} ds dtheta / 2pi.
    let mut flux_by_ring = vec![0.0; g.n_r];
    for i in 0..g.n_r {
        let s = g.s(i);
        let mut ring = 0.0;
        let mut valid = true;
        for j in 0..g.n_theta {
            let kv = k[g.idx(i, j)];
            if !kv.is_finite() {
                valid = false;
                continue;
            }
            if kv < -1e-10 {
                negative_curvature_flag = true;
            }
            ring += kv * (2.0 * field.u[g.idx(i, j)]).exp();
        }
        if valid {
            flux_by_ring[i] = ring * (2.0 * s).exp() * g.dtheta() * g.w_s(i)
                / (2.0 * std::f64::consts::PI);
        } else {
            flux_by_ring[i] = f64::NAN;
        }
    }
    // Patch NaN end rows (stencil mode) with their neighbors, weighted.
    for i in 0..g.n_r {
        if flux_by_ring[i].is_nan() {
            let src = if i == 0 { 1 } else { g.n_r - 2 };
            flux_by_ring[i] = flux_by_ring[src] * g.w_s(i) / g.w_s(src);
        }
    }
    let m_flux: f64 = flux_by_ring.iter().sum();

    // Circle averages and their log-radius derivative.
    let ubar: Vec<f64> = (0..g.n_r)
        .map(|i| {
            let row = &field.u[g.idx(i, 0)..g.idx(i, 0) + g.n_theta];
            row.iter().sum::<f64>() / g.n_theta as f64
        })
        .collect();
    // Top-decade least squares of ubar against s.
    let s_hi = g.s_max();
    let s_lo_fit = s_hi - std::f64::consts::LN_10;
    let pts: Vec<(f64, f64)> = (0..g.n_r)
        .filter(|&i| g.s(i) >= s_lo_fit)
        .map(|i| (g.s(i), ubar[i]))
        .collect();
    if pts.len() < 4 {
        return Err(Error::GridTooSmall { need: 4, got: pts.len() });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let m_fit = -slope;

    // Boundary derivative -r ubar'(r) = -d ubar / ds, one-sided second order
    // at the outer edge.
    let nr = g.n_r;
    let ds = g.ds();
    let m_boundary = -(3.0 * ubar[nr - 1] - 4.0 * ubar[nr - 2] + ubar[nr - 3]) / (2.0 * ds);

    // Monotonicity of the cumulative flux via interior central differences.
    let mut defect = 0.0f64;
    let mut prev = f64::NEG_INFINITY;
    for i in 1..nr - 1 {
        let deriv = -(ubar[i + 1] - ubar[i - 1]) / (2.0 * ds);
        if deriv < prev {
            defect = defect.max(prev - deriv);
        }
        prev = deriv;
    }

    Ok(GrowthReport {
        m_fit,
        m_flux,
        m_boundary,
        r_window: (s_lo_fit.exp(), g.r_max),
        fit_vs_flux: (m_fit - m_flux).abs(),
        boundary_vs_flux: (m_boundary - m_flux).abs(),
        negative_curvature_flag,
        flux_monotonicity_defect: defect,
    })
}

/// Coefficient of `log(1/|z~|)` of an inverted factor near the origin,
/// fitted over the bottom decade of the inverted grid. For a factor with
/// growth exponent `m` at infinity this recovers `m_1 = 2 - m`.
pub fn inversion_log_coefficient(inverted: &PlaneConformalGrid) -> Result<f64> {
    let g = &inverted.grid;
    let s_lo = g.s_min();
    let s_hi_fit = s_lo + std::f64::consts::LN_10;
    let pts: Vec<(f64, f64)> = (0..g.n_r)
        .filter(|&i| g.s(i) <= s_hi_fit)
        .map(|i| {
            let row = &inverted.u[g.idx(i, 0)..g.idx(i, 0) + g.n_theta];
            (g.s(i), row.iter().sum::<f64>() / g.n_theta as f64)
        })
        .collect();
    if pts.len() < 4 {
        return Err(Error::GridTooSmall { need: 4, got: pts.len() });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    // v = m_1 log(1/|z~|) + ... has slope -m_1 against s.
    Ok(-slope)
}

/// Flat-case support function `rho = log(C[(x-x0)^2 + (y-y0)^2] + 1/(4C))`
/// with analytic jets; `e^{-2 rho} |dz|^2` is a round metric of curvature 1.
pub fn flat_support(c: f64, center: (f64, f64), grid: PlaneGrid) -> Result<PlaneField> {
    if c <= 0.0 {
        return Err(Error::InvalidParameter(format!("flat support needs C > 0, got {c}")));
    }
    let (x0, y0) = center;
    let f_val = move |x: f64, y: f64| {
        let dx = x - x0;
        let dy = y - y0;
        c * (dx * dx + dy * dy) + 1.0 / (4.0 * c)
    };
    let jets = PlaneJets {
        f: Arc::new(move |x, y| f_val(x, y).ln()),
        fx: Arc::new(move |x, y| 2.0 * c * (x - x0) / f_val(x, y)),
        fy: Arc::new(move |x, y| 2.0 * c * (y - y0) / f_val(x, y)),
        fxx: Arc::new(move |x, y| {
            let f = f_val(x, y);
            let dx = x - x0;
            2.0 * c / f - 4.0 * c * c * dx * dx / (f * f)
        }),
        fxy: Arc::new(move |x, y| {
            let f = f_val(x, y);
            -4.0 * c * c * (x - x0) * (y - y0) / (f * f)
        }),
        fyy: Arc::new(move |x, y| {
            let f = f_val(x, y);
            let dy = y - y0;
            2.0 * c / f - 4.0 * c * c * dy * dy / (f * f)
        }),
    };
    Ok(PlaneField::from_jets(grid, jets))
}

/// Curvature of `e^{-2 rho}|dz|^2` pointwise from a support field's jets:
/// `K = e^{2 rho} Delta rho`.
pub fn flat_support_curvature(field: &PlaneField) -> Result<Vec<f64>> {
    let mut out = vec![f64::NAN; field.grid.n_x * field.grid.n_y];
    let (rx, ry) = field.interior(1);
    for i in rx {
        for j in ry.clone() {
            let d = field.derivs(i, j)?;
            out[field.grid.idx(i, j)] = (2.0 * d.f).exp() * (d.fxx + d.fyy);
        }
    }
    Ok(out)
}
