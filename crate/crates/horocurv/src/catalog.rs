//! Closed-form model surfaces and metrics used as ground truth by every
//! other module.
//!
//! Charts come with hand-coded first and second derivatives and oriented
//! unit normals (finite differences cross-validate them in tests). The
//! orientation conventions give positive principal curvatures on the
//! convex catalog entries: spheres about the center carry `kappa = coth r`,
//! equidistant tubes `{tanh d, coth d}`, horospheres `kappa = 1`.

use std::sync::Arc;

use crate::conformal::{PlaneConformalGrid, PolarGrid};
use crate::minkowski::SpacetimeVector;
use crate::normal_flow;
use crate::sphere_field::{AnalyticJets, SphereField, SpherePatch};
use crate::surface::{MeshTopology, SurfaceChart};
use crate::{Error, Result};

/// Parameter samples at growing extent, feeding the asymptotic-boundary
/// probe.
pub type EscapeSampler = Arc<dyn Fn(f64) -> Vec<Vec<f64>> + Send + Sync>;

/// Known quantities a catalog surface must reproduce.
#[derive(Debug, Clone, Default)]
pub struct Expected {
    pub kappa: Option<Vec<f64>>,
    pub embedded: Option<bool>,
    pub boundary_points: Option<usize>,
    /// Horospherical metric is flat (`kappa_1 kappa_2 = 1`).
    pub flat_horospherical: bool,
}

/// A named model surface with its chart and ground-truth record.
#[derive(Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub chart: SurfaceChart,
    pub expected: Expected,
    /// Representative interior parameter point.
    pub sample_point: Vec<f64>,
    pub escape: Option<EscapeSampler>,
}

const NULL_DIR: [f64; 4] = [1.0, 1.0, 0.0, 0.0];

/// Horosphere tangent to the ideal point in the `(1,0,...,0)` spatial
/// direction, at signed distance `rho0` from the base point, oriented so
/// that `kappa = (1, 1)` (normal toward the ideal point).
pub fn horosphere(rho0: f64) -> CatalogEntry {
    horosphere_entry(rho0, false)
}

/// The same horosphere with the reversed orientation (`kappa = (-1, -1)`),
/// for which the Gauss map and light cone map are constant.
pub fn horosphere_flipped(rho0: f64) -> CatalogEntry {
    horosphere_entry(rho0, true)
}

fn horosphere_entry(rho0: f64, flipped: bool) -> CatalogEntry {
    let e = rho0.exp();
    let q = [rho0.cosh(), rho0.sinh(), 0.0, 0.0];
    let map = Arc::new(move |p: &[f64]| {
        let half = 0.5 * e * (p[0] * p[0] + p[1] * p[1]);
        SpacetimeVector::new(vec![
            q[0] + half * NULL_DIR[0],
            q[1] + half * NULL_DIR[1],
            p[0],
            p[1],
        ])
    });
    let d1 = Arc::new(move |p: &[f64], i: usize| {
        let mut c = vec![e * p[i], e * p[i], 0.0, 0.0];
        c[2 + i] += 1.0;
        SpacetimeVector::new(c)
    });
    let d2 = Arc::new(move |_p: &[f64], i: usize, j: usize| {
        if i == j {
            SpacetimeVector::new(vec![e, e, 0.0, 0.0])
        } else {
            SpacetimeVector::zeros(4)
        }
    });
    let map_for_normal = map.clone();
    let sign = if flipped { -1.0 } else { 1.0 };
    let normal = Arc::new(move |p: &[f64]| {
        // eta = e^{rho0} nu - phi points into the horoball (kappa = +1).
        let phi = map_for_normal(p);
        SpacetimeVector::new(vec![
            sign * (e * NULL_DIR[0] - phi.coords[0]),
            sign * (e * NULL_DIR[1] - phi.coords[1]),
            sign * -phi.coords[2],
            sign * -phi.coords[3],
        ])
    });
    let chart = SurfaceChart::from_map(2, vec![(-8.0, 8.0), (-8.0, 8.0)], map)
        .with_derivatives(d1, d2)
        .with_normal(normal)
        .with_orientation(if flipped { -1.0 } else { 1.0 })
        .with_topology(MeshTopology::OpenGrid);
    let escape: EscapeSampler = Arc::new(|extent: f64| {
        (0..64)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                vec![extent * t.cos(), extent * t.sin()]
            })
            .collect()
    });
    let kappa = if flipped { vec![-1.0, -1.0] } else { vec![1.0, 1.0] };
    CatalogEntry {
        name: if flipped {
            format!("horosphere:distance={rho0},orientation=flipped")
        } else {
            format!("horosphere:distance={rho0}")
        },
        chart,
        expected: Expected {
            kappa: Some(kappa),
            embedded: Some(true),
            boundary_points: Some(1),
            flat_horospherical: true,
        },
        sample_point: vec![0.4, -0.3],
        escape: Some(escape),
    }
}

/// Equidistant tube at distance `d > 0` about the geodesic through the base
/// point in the `(1,0,0)` direction; `wraps` copies in the angle give the
/// covering maps. Curvatures `{tanh d, coth d}`, oriented toward the axis.
pub fn equidistant(d: f64, wraps: usize) -> Result<CatalogEntry> {
    if d <= 0.0 {
        return Err(Error::InvalidParameter(format!("equidistant needs d > 0, got {d}")));
    }
    if wraps == 0 {
        return Err(Error::InvalidParameter("wraps must be >= 1".into()));
    }
    let w = wraps as f64;
    let (sh, ch) = (d.sinh(), d.cosh());
    let map = Arc::new(move |p: &[f64]| {
        let (s, th) = (p[0], p[1]);
        SpacetimeVector::new(vec![
            s.cosh() * ch,
            s.sinh() * ch,
            sh * (w * th).cos(),
            sh * (w * th).sin(),
        ])
    });
    let d1 = Arc::new(move |p: &[f64], i: usize| {
        let (s, th) = (p[0], p[1]);
        match i {
            0 => SpacetimeVector::new(vec![s.sinh() * ch, s.cosh() * ch, 0.0, 0.0]),
            _ => SpacetimeVector::new(vec![
                0.0,
                0.0,
                -w * sh * (w * th).sin(),
                w * sh * (w * th).cos(),
            ]),
        }
    });
    let d2 = Arc::new(move |p: &[f64], i: usize, j: usize| {
        let (s, th) = (p[0], p[1]);
        match (i, j) {
            (0, 0) => SpacetimeVector::new(vec![s.cosh() * ch, s.sinh() * ch, 0.0, 0.0]),
            (1, 1) => SpacetimeVector::new(vec![
                0.0,
                0.0,
                -w * w * sh * (w * th).cos(),
                -w * w * sh * (w * th).sin(),
            ]),
            _ => SpacetimeVector::zeros(4),
        }
    });
    let normal = Arc::new(move |p: &[f64]| {
        let (s, th) = (p[0], p[1]);
        SpacetimeVector::new(vec![
            -s.cosh() * sh,
            -s.sinh() * sh,
            -ch * (w * th).cos(),
            -ch * (w * th).sin(),
        ])
    });
    let chart = SurfaceChart::from_map(
        2,
        vec![(-3.0, 3.0), (0.0, 2.0 * std::f64::consts::PI)],
        map,
    )
    .with_derivatives(d1, d2)
    .with_normal(normal)
    .with_periodic(vec![None, Some(2.0 * std::f64::consts::PI)])
    .with_topology(MeshTopology::Cylinder);
    let escape: EscapeSampler = Arc::new(|extent: f64| {
        let mut out = Vec::new();
        for sign in [-1.0, 1.0] {
            for k in 0..32 {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                out.push(vec![sign * extent, th]);
            }
        }
        out
    });
    Ok(CatalogEntry {
        name: format!("equidistant:d={d},wraps={wraps}"),
        chart,
        expected: Expected {
            kappa: Some(vec![d.tanh(), 1.0 / d.tanh()]),
            embedded: Some(wraps == 1),
            boundary_points: Some(2),
            flat_horospherical: true,
        },
        sample_point: vec![0.4, 1.2],
        escape: Some(escape),
    })
}

/// Geodesic sphere of radius `r` about the base point; `kappa = coth r` with
/// the normal oriented toward the center.
pub fn geodesic_sphere(r: f64) -> CatalogEntry {
    let (sh, ch) = (r.sinh(), r.cosh());
    let omega = |a: f64, b: f64| -> [f64; 3] {
        [a.sin() * b.cos(), a.sin() * b.sin(), a.cos()]
    };
    let map = Arc::new(move |p: &[f64]| {
        let o = omega(p[0], p[1]);
        SpacetimeVector::new(vec![ch, sh * o[0], sh * o[1], sh * o[2]])
    });
    let d1 = Arc::new(move |p: &[f64], i: usize| {
        let (a, b) = (p[0], p[1]);
        let o = match i {
            0 => [a.cos() * b.cos(), a.cos() * b.sin(), -a.sin()],
            _ => [-a.sin() * b.sin(), a.sin() * b.cos(), 0.0],
        };
        SpacetimeVector::new(vec![0.0, sh * o[0], sh * o[1], sh * o[2]])
    });
    let d2 = Arc::new(move |p: &[f64], i: usize, j: usize| {
        let (a, b) = (p[0], p[1]);
        let o = match (i, j) {
            (0, 0) => [-a.sin() * b.cos(), -a.sin() * b.sin(), -a.cos()],
            (1, 1) => [-a.sin() * b.cos(), -a.sin() * b.sin(), 0.0],
            _ => [-a.cos() * b.sin(), a.cos() * b.cos(), 0.0],
        };
        SpacetimeVector::new(vec![0.0, sh * o[0], sh * o[1], sh * o[2]])
    });
    let normal = Arc::new(move |p: &[f64]| {
        let o = omega(p[0], p[1]);
        SpacetimeVector::new(vec![-sh, -ch * o[0], -ch * o[1], -ch * o[2]])
    });
    let chart = SurfaceChart::from_map(
        2,
        vec![(0.05, std::f64::consts::PI - 0.05), (0.0, 2.0 * std::f64::consts::PI)],
        map,
    )
    .with_derivatives(d1, d2)
    .with_normal(normal)
    .with_orientation(-1.0)
    .with_periodic(vec![None, Some(2.0 * std::f64::consts::PI)])
    .with_topology(MeshTopology::ClosedSphere);
    let coth = ch / sh;
    CatalogEntry {
        name: format!("geodesic_sphere:r={r}"),
        chart,
        expected: Expected {
            kappa: Some(vec![coth, coth]),
            embedded: Some(true),
            boundary_points: Some(0),
            flat_horospherical: false,
        },
        sample_point: vec![1.1, 0.7],
        escape: None,
    }
}

/// Cylinder over a loop limacon pushed into hyperbolic 3-space along the
/// geodesics normal to a totally geodesic plane: a non-convex immersed
/// surface with a genuine self-intersection along the inner loop. The
/// orientation makes the angular principal curvature negative (the ruling
/// direction is flat), so the convexity flags fail decisively.
pub fn limacon_cylinder(scale: f64) -> Result<CatalogEntry> {
    if scale <= 0.0 {
        return Err(Error::InvalidParameter("limacon scale must be positive".into()));
    }
    // Planar limacon r(t) = 1 + 2 cos t, re-parametrized:
    // c1 = scale (cos t + 1 + cos 2t), c2 = scale (sin t + sin 2t).
    let c = move |t: f64| -> [f64; 2] {
        [scale * (t.cos() + 1.0 + (2.0 * t).cos()), scale * (t.sin() + (2.0 * t).sin())]
    };
    let cp = move |t: f64| -> [f64; 2] {
        [scale * (-t.sin() - 2.0 * (2.0 * t).sin()), scale * (t.cos() + 2.0 * (2.0 * t).cos())]
    };
    let cpp = move |t: f64| -> [f64; 2] {
        [scale * (-t.cos() - 4.0 * (2.0 * t).cos()), scale * (-t.sin() - 4.0 * (2.0 * t).sin())]
    };
    let lift = move |t: f64| -> [f64; 3] {
        let v = c(t);
        [(1.0 + v[0] * v[0] + v[1] * v[1]).sqrt(), v[0], v[1]]
    };
    let lift_d = move |t: f64| -> [f64; 3] {
        let v = c(t);
        let vp = cp(t);
        let c0 = (1.0 + v[0] * v[0] + v[1] * v[1]).sqrt();
        [(v[0] * vp[0] + v[1] * vp[1]) / c0, vp[0], vp[1]]
    };
    let lift_dd = move |t: f64| -> [f64; 3] {
        let v = c(t);
        let vp = cp(t);
        let vpp = cpp(t);
        let c0 = (1.0 + v[0] * v[0] + v[1] * v[1]).sqrt();
        let num = vp[0] * vp[0] + v[0] * vpp[0] + vp[1] * vp[1] + v[1] * vpp[1];
        let c0p = (v[0] * vp[0] + v[1] * vp[1]) / c0;
        [num / c0 - c0p * c0p / c0, vpp[0], vpp[1]]
    };
    let map = Arc::new(move |p: &[f64]| {
        let (t, s) = (p[0], p[1]);
        let l = lift(t);
        SpacetimeVector::new(vec![s.cosh() * l[0], s.cosh() * l[1], s.cosh() * l[2], s.sinh()])
    });
    let d1 = Arc::new(move |p: &[f64], i: usize| {
        let (t, s) = (p[0], p[1]);
        match i {
            0 => {
                let l = lift_d(t);
                SpacetimeVector::new(vec![s.cosh() * l[0], s.cosh() * l[1], s.cosh() * l[2], 0.0])
            }
            _ => {
                let l = lift(t);
                SpacetimeVector::new(vec![
                    s.sinh() * l[0],
                    s.sinh() * l[1],
                    s.sinh() * l[2],
                    s.cosh(),
                ])
            }
        }
    });
    let d2 = Arc::new(move |p: &[f64], i: usize, j: usize| {
        let (t, s) = (p[0], p[1]);
        match (i, j) {
            (0, 0) => {
                let l = lift_dd(t);
                SpacetimeVector::new(vec![s.cosh() * l[0], s.cosh() * l[1], s.cosh() * l[2], 0.0])
            }
            (1, 1) => {
                let l = lift(t);
                SpacetimeVector::new(vec![
                    s.cosh() * l[0],
                    s.cosh() * l[1],
                    s.cosh() * l[2],
                    s.sinh(),
                ])
            }
            _ => {
                let l = lift_d(t);
                SpacetimeVector::new(vec![s.sinh() * l[0], s.sinh() * l[1], s.sinh() * l[2], 0.0])
            }
        }
    });
    let normal = Arc::new(move |p: &[f64]| {
        // Minkowski normal of the curve within the totally geodesic plane:
        // Euclidean cross product with the time component flipped, oriented
        // so the angular curvature is negative.
        let t = p[0];
        let l = lift(t);
        let ld = lift_d(t);
        let e = [
            l[1] * ld[2] - l[2] * ld[1],
            l[2] * ld[0] - l[0] * ld[2],
            l[0] * ld[1] - l[1] * ld[0],
        ];
        let n = [-e[0], e[1], e[2]];
        let norm2 = -n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
        let inv = -1.0 / norm2.sqrt();
        SpacetimeVector::new(vec![inv * n[0], inv * n[1], inv * n[2], 0.0])
    });
    let chart = SurfaceChart::from_map(
        2,
        vec![(0.0, 2.0 * std::f64::consts::PI), (-3.0, 3.0)],
        map,
    )
    .with_derivatives(d1, d2)
    .with_normal(normal)
    .with_periodic(vec![Some(2.0 * std::f64::consts::PI), None])
    .with_topology(MeshTopology::Cylinder);
    let escape: EscapeSampler = Arc::new(|extent: f64| {
        let mut out = Vec::new();
        for sign in [-1.0, 1.0] {
            for k in 0..32 {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                out.push(vec![th, sign * extent]);
            }
        }
        out
    });
    Ok(CatalogEntry {
        name: format!("limacon_cylinder:scale={scale}"),
        chart,
        expected: Expected {
            kappa: None,
            embedded: Some(false),
            boundary_points: Some(2),
            flat_horospherical: false,
        },
        // Inner-loop parameter (t = pi sits on the loop).
        sample_point: vec![std::f64::consts::PI, 0.3],
        escape: Some(escape),
    })
}

/// Model conformal factor `u_m = -m log sqrt(1 + |z|^2)` with curvature
/// `K_m = 2m (1 + |z|^2)^{m-2}`; complete for `m <= 1`, flagged incomplete
/// for `m in (1, 2)`.
pub fn model_metric(
    m: f64,
    r_min: f64,
    r_max: f64,
    n_r: usize,
    n_theta: usize,
) -> Result<PlaneConformalGrid> {
    if m <= 0.0 {
        return Err(Error::InvalidParameter(format!("model metric needs m > 0, got {m}")));
    }
    let grid = PolarGrid::new(r_min, r_max, n_r, n_theta)?;
    let mut field = PlaneConformalGrid::from_fn(grid.clone(), &|r, _| {
        -(m / 2.0) * (1.0 + r * r).ln()
    });
    let mut k = Vec::with_capacity(grid.len());
    for i in 0..grid.n_r {
        let r = grid.r(i);
        let kv = 2.0 * m * (1.0 + r * r).powf(m - 2.0);
        for _ in 0..grid.n_theta {
            k.push(kv);
        }
    }
    field.k = Some(k);
    let u = Arc::new(move |s: f64| -(m / 2.0) * (1.0 + (2.0 * s).exp()).ln());
    let us = Arc::new(move |s: f64| {
        let w = (2.0 * s).exp();
        -m * w / (1.0 + w)
    });
    let uss = Arc::new(move |s: f64| {
        let w = (2.0 * s).exp();
        -2.0 * m * w / ((1.0 + w) * (1.0 + w))
    });
    field.radial = Some((u, us, uss));
    field.incomplete_flag = m > 1.0;
    Ok(field)
}

/// Euclidean plane factor `u = 0` with `K = 0`.
pub fn flat_metric(r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> Result<PlaneConformalGrid> {
    let grid = PolarGrid::new(r_min, r_max, n_r, n_theta)?;
    let mut field = PlaneConformalGrid::from_fn(grid.clone(), &|_, _| 0.0);
    field.k = Some(vec![0.0; grid.len()]);
    field.radial = Some((
        Arc::new(|_| 0.0),
        Arc::new(|_| 0.0),
        Arc::new(|_| 0.0),
    ));
    Ok(field)
}

/// Round-sphere stereographic factor `u = log 2 - log(1 + |z|^2)`, `K = 1`.
pub fn round_metric(r_min: f64, r_max: f64, n_r: usize, n_theta: usize) -> Result<PlaneConformalGrid> {
    let grid = PolarGrid::new(r_min, r_max, n_r, n_theta)?;
    let mut field =
        PlaneConformalGrid::from_fn(grid.clone(), &|r, _| 2.0f64.ln() - (1.0 + r * r).ln());
    field.k = Some(vec![1.0; grid.len()]);
    field.radial = Some((
        Arc::new(|s: f64| 2.0f64.ln() - (1.0 + (2.0 * s).exp()).ln()),
        Arc::new(|s: f64| {
            let w = (2.0 * s).exp();
            -2.0 * w / (1.0 + w)
        }),
        Arc::new(|s: f64| {
            let w = (2.0 * s).exp();
            -4.0 * w / ((1.0 + w) * (1.0 + w))
        }),
    ));
    Ok(field)
}

/// Completeness proxy: `integral_0^R e^{u_m(r)} dr` by midpoint quadrature.
/// Diverges with `R` for `m <= 1`, converges for `m > 1`.
pub fn completeness_proxy(m: f64, r_max: f64) -> f64 {
    let n = 40_000;
    let h = r_max / n as f64;
    (0..n)
        .map(|i| {
            let r = (i as f64 + 0.5) * h;
            (1.0 + r * r).powf(-m / 2.0) * h
        })
        .sum()
}

/// Support field of the geodesic sphere on its Gauss image: constant `r`.
pub fn sphere_support_field(r: f64, n_a: usize, n_b: usize) -> SphereField {
    let patch = SpherePatch::about_x1((0.6, std::f64::consts::PI - 0.6), (0.1, 1.6), n_a, n_b);
    SphereField::from_jets(
        patch,
        AnalyticJets::radial(Arc::new(move |_| r), Arc::new(|_| 0.0), Arc::new(|_| 0.0)),
    )
}

/// Support field of the equidistant tube: `rho(a) = d - log sin a` in
/// colatitude about the axis endpoints.
pub fn equidistant_support_field(d: f64, n_a: usize, n_b: usize) -> SphereField {
    let patch = SpherePatch::about_x1((0.6, std::f64::consts::PI - 0.6), (0.1, 1.6), n_a, n_b);
    SphereField::from_jets(
        patch,
        AnalyticJets::radial(
            Arc::new(move |a: f64| d - a.sin().ln()),
            Arc::new(|a: f64| -a.cos() / a.sin()),
            Arc::new(|a: f64| 1.0 / (a.sin() * a.sin())),
        ),
    )
}

/// Support field of the horosphere on its Gauss image
/// (`S^2` minus the ideal point): `rho(a) = -rho0 + log 2 - log(1 - cos a)`.
pub fn horosphere_support_field(rho0: f64, n_a: usize, n_b: usize) -> SphereField {
    let patch = SpherePatch::about_x1((0.8, std::f64::consts::PI - 0.2), (0.1, 1.6), n_a, n_b);
    SphereField::from_jets(
        patch,
        AnalyticJets::radial(
            Arc::new(move |a: f64| -rho0 + 2.0f64.ln() - (1.0 - a.cos()).ln()),
            Arc::new(|a: f64| -a.sin() / (1.0 - a.cos())),
            Arc::new(|a: f64| {
                let half = 0.5 * a;
                0.5 / (half.sin() * half.sin())
            }),
        ),
    )
}

/// Chart of the equidistant tube's normal-flow leaf at time `t`,
/// parametrized over the Gauss image; derivatives by finite differences.
/// Feeding `t = 0` reproduces the equidistant chart exactly.
pub fn equidistant_flow_chart(d: f64, t: f64) -> SurfaceChart {
    let map = Arc::new(move |p: &[f64]| {
        let (s, th) = (p[0], p[1]);
        let sech = 1.0 / s.cosh();
        let x = [s.tanh(), sech * th.cos(), sech * th.sin()];
        let rho = d + s.cosh().ln();
        // Tangential gradient of rho(x) = d - log sqrt(1 - x1^2).
        let coeff = s.sinh() * s.cosh();
        let mut grad = [0.0; 3];
        for i in 0..3 {
            grad[i] = coeff * (if i == 0 { 1.0 } else { 0.0 } - x[0] * x[i]);
        }
        // Re-project to kill rounding in <x, grad>.
        let dot: f64 = grad.iter().zip(&x).map(|(g, xi)| g * xi).sum();
        for i in 0..3 {
            grad[i] -= dot * x[i];
        }
        normal_flow::flow_point(rho, &grad, &x, t).expect("flow point on catalog data")
    });
    SurfaceChart::from_map(2, vec![(-3.0, 3.0), (0.0, 2.0 * std::f64::consts::PI)], map)
        .with_periodic(vec![None, Some(2.0 * std::f64::consts::PI)])
        .with_topology(MeshTopology::Cylinder)
}

/// Support and gradient data of the horosphere over its Gauss image, for
/// flow tests: returns `(rho, grad_rho, x)` at a patch parameter.
pub fn horosphere_gauss_data(rho0: f64, a: f64, b: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let x = vec![a.cos(), a.sin() * b.cos(), a.sin() * b.sin()];
    let rho = -rho0 + 2.0f64.ln() - (1.0 - x[0]).ln();
    let c = 1.0 / (1.0 - x[0]);
    let mut grad = vec![0.0; 3];
    for i in 0..3 {
        grad[i] = c * (if i == 0 { 1.0 } else { 0.0 } - x[0] * x[i]);
    }
    let dot: f64 = grad.iter().zip(&x).map(|(g, xi)| g * xi).sum();
    for i in 0..3 {
        grad[i] -= dot * x[i];
    }
    (rho, grad, x)
}
