//! Empirical embeddedness checks: Gauss-map injectivity probing and
//! asymptotic-boundary clustering, combined with the mesh intersection
//! report.

use crate::catalog::EscapeSampler;
use crate::horospherical::light_cone;
use crate::mesh::{IntersectionReport, SurfaceMesh};
use crate::minkowski::to_ball;
use crate::surface::{self, SurfaceChart};
use crate::tol::{EPS_GAUSS, ESCAPE_NORM};
#[cfg(test)]
use crate::tol::{TAU_COINC, THETA_SEP};
use crate::{Error, Result};

/// One cluster of ideal limit directions.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundaryCluster {
    pub representative: Vec<f64>,
    pub count: usize,
}

/// Gauss-map injectivity probe output.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InjectivityReport {
    /// Parameter pairs mapping to nearly the same Gauss point while far
    /// apart in parameters.
    pub violations: Vec<(Vec<f64>, Vec<f64>)>,
    /// The sampled Gauss image collapses to a point (constant Gauss map).
    pub degenerate_constant_gauss: bool,
    pub samples_used: usize,
    pub samples_not_weakly_convex: usize,
}

/// Combined probe report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeReport {
    pub surface: String,
    pub resolution: usize,
    pub transversal_pairs: usize,
    pub coincident_pairs: usize,
    pub first_transversal: Option<(usize, usize)>,
    pub boundary_clusters: Option<Vec<BoundaryCluster>>,
    pub escape_flag: Option<String>,
    pub injectivity: InjectivityReport,
    pub euler_characteristic: i64,
    pub max_ball_norm: f64,
}

pub use crate::mesh::{sample_mesh, self_intersect};

fn angular_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0).acos()
}

fn param_distance(chart: &SurfaceChart, p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for axis in 0..chart.dim {
        let mut d = (p[axis] - q[axis]).abs();
        if let Some(period) = chart.periodic[axis] {
            d = d.min(period - d);
        }
        s += d * d;
    }
    s.sqrt()
}

/// Sample the chart on a parameter grid and report Gauss-image collisions:
/// pairs closer than `eps_gauss` in angle but farther than `delta_p` in
/// parameters. A Gauss image with no angular spread at all is flagged as the
/// degenerate (constant-map) case instead.
pub fn gauss_injectivity_probe(chart: &SurfaceChart, samples: usize) -> Result<InjectivityReport> {
    let side = (samples as f64).sqrt().ceil() as usize;
    let side = side.max(4);
    let mut points: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut skipped = 0usize;
    let margin = 4.0 * chart.fd_step;
    // Parameter-grid positions per axis.
    let axis_vals = |axis: usize| -> Vec<f64> {
        match chart.periodic[axis] {
            Some(period) => (0..side).map(|k| period * k as f64 / side as f64).collect(),
            None => {
                let (lo, hi) = chart.domain[axis];
                (0..side)
                    .map(|k| {
                        lo + margin + (hi - lo - 2.0 * margin) * k as f64 / (side as f64 - 1.0)
                    })
                    .collect()
            }
        }
    };
    let us = axis_vals(0);
    let vs = axis_vals(1);
    for u in &us {
        for v in &vs {
            let p = vec![*u, *v];
            let jet = surface::jet(chart, &p)?;
            let pr = surface::principal(&jet)?;
            let weakly = pr.curvatures.iter().all(|k| *k > -1.0);
            if !weakly {
                skipped += 1;
            }
            let data = light_cone(&jet)?;
            points.push((p, data.gauss_point));
        }
    }
    // Angular spread of the sampled image.
    let mut spread = 0.0f64;
    for (_, g) in &points[1..] {
        spread = spread.max(angular_distance(g, &points[0].1));
    }
    if spread < EPS_GAUSS {
        return Ok(InjectivityReport {
            violations: Vec::new(),
            degenerate_constant_gauss: true,
            samples_used: points.len(),
            samples_not_weakly_convex: skipped,
        });
    }
    let diag: f64 = chart
        .domain
        .iter()
        .map(|(lo, hi)| (hi - lo) * (hi - lo))
        .sum::<f64>()
        .sqrt();
    let delta_p = 0.05 * diag;
    let mut violations = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let (pi, gi) = &points[i];
            let (pj, gj) = &points[j];
            if angular_distance(gi, gj) < EPS_GAUSS && param_distance(chart, pi, pj) > delta_p {
                violations.push((pi.clone(), pj.clone()));
            }
        }
    }
    Ok(InjectivityReport {
        violations,
        degenerate_constant_gauss: false,
        samples_used: points.len(),
        samples_not_weakly_convex: skipped,
    })
}

/// Geometric extent schedule for boundary escape.
#[derive(Debug, Clone, Copy)]
pub struct EscapeSchedule {
    pub initial_extent: f64,
    pub factor: f64,
    pub max_steps: usize,
    pub escape_norm: f64,
}

impl Default for EscapeSchedule {
    fn default() -> Self {
        EscapeSchedule { initial_extent: 1.0, factor: 2.0, max_steps: 40, escape_norm: ESCAPE_NORM }
    }
}

/// Ball-model limit directions of far samples, clustered by single linkage
/// at angular separation `theta_sep`. Charts that never push past the
/// escape norm (compact surfaces) report the escape failure instead.
pub fn asymptotic_boundary(
    chart: &SurfaceChart,
    escape: Option<&EscapeSampler>,
    schedule: EscapeSchedule,
    theta_sep: f64,
) -> Result<Vec<BoundaryCluster>> {
    let mut best_norm = 0.0f64;
    let mut extent = schedule.initial_extent;
    for _ in 0..schedule.max_steps {
        let params: Vec<Vec<f64>> = match escape {
            Some(f) => f(extent),
            None => domain_ring(chart),
        };
        let mut dirs = Vec::new();
        let mut max_norm = 0.0f64;
        for p in &params {
            let x = chart.eval(p);
            let b = to_ball(&x)?;
            let n: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            max_norm = max_norm.max(n);
            if n > 0.99 {
                dirs.push(b.iter().map(|v| v / n).collect::<Vec<f64>>());
            }
        }
        best_norm = best_norm.max(max_norm);
        if max_norm > schedule.escape_norm {
            return Ok(cluster_directions(&dirs, theta_sep));
        }
        if escape.is_none() {
            break;
        }
        extent *= schedule.factor;
    }
    Err(Error::EscapeInsufficient { max_norm: best_norm })
}

fn domain_ring(chart: &SurfaceChart) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let n = 16;
    let (lo0, hi0) = chart.domain[0];
    let (lo1, hi1) = chart.domain[1];
    for k in 0..n {
        let t = k as f64 / (n as f64 - 1.0);
        out.push(vec![lo0 + t * (hi0 - lo0), lo1]);
        out.push(vec![lo0 + t * (hi0 - lo0), hi1]);
        out.push(vec![lo0, lo1 + t * (hi1 - lo1)]);
        out.push(vec![hi0, lo1 + t * (hi1 - lo1)]);
    }
    out
}

/// Single-linkage clustering of unit directions with the given angular
/// threshold; representatives are normalized means, deterministic order
/// (largest cluster first, then lexicographic).
pub fn cluster_directions(dirs: &[Vec<f64>], theta_sep: f64) -> Vec<BoundaryCluster> {
    let n = dirs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if angular_distance(&dirs[i], &dirs[j]) < theta_sep {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut clusters: Vec<BoundaryCluster> = groups
        .values()
        .map(|members| {
            let dim = dirs[members[0]].len();
            let mut mean = vec![0.0; dim];
            for &m in members {
                for k in 0..dim {
                    mean[k] += dirs[m][k];
                }
            }
            let norm: f64 = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in mean.iter_mut() {
                *v /= norm;
            }
            BoundaryCluster { representative: mean, count: members.len() }
        })
        .collect();
    clusters.sort_by(|a, b| {
        b.count.cmp(&a.count).then_with(|| {
            a.representative
                .iter()
                .zip(&b.representative)
                .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    clusters
}

/// Full probe: mesh, intersection buckets, injectivity, and boundary
/// clusters.
#[allow(clippy::too_many_arguments)]
pub fn probe_surface(
    name: &str,
    chart: &SurfaceChart,
    escape: Option<&EscapeSampler>,
    resolution: usize,
    extent: f64,
    injectivity_samples: usize,
    tau_coinc: f64,
    theta_sep: f64,
) -> Result<(ProbeReport, SurfaceMesh)> {
    let mesh = sample_mesh(chart, resolution, extent)?;
    let intersections: IntersectionReport = self_intersect(&mesh, tau_coinc);
    let injectivity = gauss_injectivity_probe(chart, injectivity_samples)?;
    let (boundary_clusters, escape_flag) =
        match asymptotic_boundary(chart, escape, EscapeSchedule::default(), theta_sep) {
            Ok(clusters) => (Some(clusters), None),
            Err(Error::EscapeInsufficient { max_norm }) => (
                None,
                Some(format!("samples stay at ball norm {max_norm:.4} (compact or bounded chart)")),
            ),
            Err(e) => return Err(e),
        };
    Ok((
        ProbeReport {
            surface: name.to_string(),
            resolution,
            transversal_pairs: intersections.transversal.len(),
            coincident_pairs: intersections.coincident.len(),
            first_transversal: intersections.transversal.first().copied(),
            boundary_clusters,
            escape_flag,
            injectivity,
            euler_characteristic: mesh.euler_characteristic(),
            max_ball_norm: mesh.max_ball_norm(),
        },
        mesh,
    ))
}
