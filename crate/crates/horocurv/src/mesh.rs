//! Ball-model triangle meshes of surface charts, OFF export, and
//! self-intersection detection over a spatial-hash candidate set.
//!
//! Intersection tests run in Poincare ball coordinates: they are bounded and
//! the ball model is a homeomorphism, so Euclidean triangle predicates
//! detect exactly the self-intersections of the surface. Pairs whose
//! triangles lie within the coincidence tolerance of a common plane and
//! overlap are reported separately as coincident sheets (covering maps)
//! rather than transversal crossings.

use std::collections::{BTreeMap, BTreeSet};

use crate::minkowski::to_ball;
use crate::surface::{MeshTopology, SurfaceChart};
use crate::tol::TAU_COINC;
use crate::{Error, Result};

/// Triangle mesh in ball coordinates with per-vertex parameter tags.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub params: Vec<Vec<f64>>,
}

impl SurfaceMesh {
    pub fn edge_count(&self) -> usize {
        let mut edges = BTreeSet::new();
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    pub fn max_ball_norm(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max)
    }

    /// ASCII OFF serialization.
    pub fn to_off(&self) -> String {
        let mut out = String::from("OFF\n");
        out.push_str(&format!(
            "{} {} {}\n",
            self.vertices.len(),
            self.triangles.len(),
            self.edge_count()
        ));
        for v in &self.vertices {
            out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v[0], v[1], v[2]));
        }
        for t in &self.triangles {
            out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
        }
        out
    }
}

fn tri_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = cross(&u, &v);
    0.5 * norm(&n)
}

fn cross(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn dot(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn norm(u: &[f64; 3]) -> f64 {
    dot(u, u).sqrt()
}

fn sub(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [u[0] - v[0], u[1] - v[1], u[2] - v[2]]
}

/// Triangulate a regular parameter grid mapped through the chart into ball
/// coordinates. Non-periodic axes cover `[-extent, extent]` (clipped to the
/// chart domain for bounded charts like the sphere); periodic axes cover one
/// full period. Closed spheres get pole fans so the mesh is watertight.
pub fn sample_mesh(chart: &SurfaceChart, resolution: usize, extent: f64) -> Result<SurfaceMesh> {
    if resolution < 8 {
        return Err(Error::InvalidParameter(format!(
            "mesh resolution must be >= 8, got {resolution}"
        )));
    }
    match chart.mesh_topology {
        MeshTopology::ClosedSphere => sample_sphere_mesh(chart, resolution),
        _ => sample_grid_mesh(chart, resolution, extent),
    }
}

fn axis_samples(chart: &SurfaceChart, axis: usize, resolution: usize, extent: f64) -> (Vec<f64>, bool) {
    if let Some(period) = chart.periodic[axis] {
        let vals = (0..resolution).map(|k| period * k as f64 / resolution as f64).collect();
        (vals, true)
    } else {
        let (lo, hi) = chart.domain[axis];
        let a = lo.max(-extent);
        let b = hi.min(extent);
        let vals = (0..=resolution)
            .map(|k| a + (b - a) * k as f64 / resolution as f64)
            .collect();
        (vals, false)
    }
}

fn sample_grid_mesh(chart: &SurfaceChart, resolution: usize, extent: f64) -> Result<SurfaceMesh> {
    let (u_vals, u_wraps) = axis_samples(chart, 0, resolution, extent);
    let (v_vals, v_wraps) = axis_samples(chart, 1, resolution, extent);
    let nu = u_vals.len();
    let nv = v_vals.len();
    let mut vertices = Vec::with_capacity(nu * nv);
    let mut params = Vec::with_capacity(nu * nv);
    for &u in &u_vals {
        for &v in &v_vals {
            let p = vec![u, v];
            vertices.push(ball_point(chart, &p)?);
            params.push(p);
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut triangles = Vec::new();
    let ni = if u_wraps { nu } else { nu - 1 };
    let nj = if v_wraps { nv } else { nv - 1 };
    for i in 0..ni {
        for j in 0..nj {
            triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let mesh = SurfaceMesh { vertices, triangles, params };
    validate_mesh(&mesh)?;
    Ok(mesh)
}

fn sample_sphere_mesh(chart: &SurfaceChart, resolution: usize) -> Result<SurfaceMesh> {
    let n_b = resolution;
    let n_rows = resolution - 1;
    let pi = std::f64::consts::PI;
    let mut vertices = Vec::new();
    let mut params = Vec::new();
    for i in 1..=n_rows {
        let a = pi * i as f64 / resolution as f64;
        for j in 0..n_b {
            let b = 2.0 * pi * j as f64 / n_b as f64;
            let p = vec![a, b];
            vertices.push(ball_point(chart, &p)?);
            params.push(p);
        }
    }
    let north = vertices.len();
    vertices.push(ball_point(chart, &[0.0, 0.0])?);
    params.push(vec![0.0, 0.0]);
    let south = vertices.len();
    vertices.push(ball_point(chart, &[pi, 0.0])?);
    params.push(vec![pi, 0.0]);

    let idx = |row: usize, j: usize| row * n_b + (j % n_b);
    let mut triangles = Vec::new();
    for j in 0..n_b {
        triangles.push([north, idx(0, j), idx(0, j + 1)]);
    }
    for row in 0..n_rows - 1 {
        for j in 0..n_b {
            triangles.push([idx(row, j), idx(row + 1, j), idx(row + 1, j + 1)]);
            triangles.push([idx(row, j), idx(row + 1, j + 1), idx(row, j + 1)]);
        }
    }
    for j in 0..n_b {
        triangles.push([south, idx(n_rows - 1, j + 1), idx(n_rows - 1, j)]);
    }
    let mesh = SurfaceMesh { vertices, triangles, params };
    validate_mesh(&mesh)?;
    Ok(mesh)
}

fn ball_point(chart: &SurfaceChart, p: &[f64]) -> Result<[f64; 3]> {
    let x = chart.eval(p);
    let b = to_ball(&x)?;
    if b.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: b.len() });
    }
    Ok([b[0], b[1], b[2]])
}

// `!(n2 < 1.0)` also rejects NaN vertices.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn validate_mesh(mesh: &SurfaceMesh) -> Result<()> {
    for v in &mesh.vertices {
        let n2 = dot(v, v);
        if !(n2 < 1.0) {
            return Err(Error::InvalidParameter(format!("vertex outside unit ball: |v|^2 = {n2}")));
        }
    }
    for t in &mesh.triangles {
        let area = tri_area(&mesh.vertices[t[0]], &mesh.vertices[t[1]], &mesh.vertices[t[2]]);
        if area <= 1e-14 {
            return Err(Error::InvalidParameter(format!("degenerate triangle, area {area}")));
        }
    }
    Ok(())
}

/// Intersection pairs split into transversal crossings and coincident
/// sheets, each sorted by index pair.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct IntersectionReport {
    pub transversal: Vec<(usize, usize)>,
    pub coincident: Vec<(usize, usize)>,
}

/// Exact triangle-triangle intersection over a spatial-hash candidate set.
/// Pairs sharing a vertex index are excluded; results are deterministic and
/// sorted.
///
/// When a parameter grid samples a self-intersection curve exactly, the
/// crossing pairs touch only along shared vertex positions and are excluded
/// as adjacency like their index-sharing counterparts; choosing a resolution
/// that does not divide the crossing symmetry avoids the degeneracy.
pub fn self_intersect(mesh: &SurfaceMesh, tau_coinc: f64) -> IntersectionReport {
    let nt = mesh.triangles.len();
    let mut boxes = Vec::with_capacity(nt);
    let mut max_extent = Vec::with_capacity(nt);
    for t in &mesh.triangles {
        let vs = [&mesh.vertices[t[0]], &mesh.vertices[t[1]], &mesh.vertices[t[2]]];
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in vs {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        max_extent.push((hi[0] - lo[0]).max(hi[1] - lo[1]).max(hi[2] - lo[2]));
        boxes.push((lo, hi));
    }
    let mut extents = max_extent.clone();
    extents.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cell = (2.0 * extents[extents.len() / 2]).max(1e-9);

    let mut grid: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, (lo, hi)) in boxes.iter().enumerate() {
        let c0 = ((lo[0] / cell).floor() as i64, (lo[1] / cell).floor() as i64, (lo[2] / cell).floor() as i64);
        let c1 = ((hi[0] / cell).floor() as i64, (hi[1] / cell).floor() as i64, (hi[2] / cell).floor() as i64);
        for x in c0.0..=c1.0 {
            for y in c0.1..=c1.1 {
                for z in c0.2..=c1.2 {
                    grid.entry((x, y, z)).or_default().push(i);
                }
            }
        }
    }

    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    for bucket in grid.values() {
        for (a_pos, &a) in bucket.iter().enumerate() {
            for &b in &bucket[a_pos + 1..] {
                let (lo_a, hi_a) = &boxes[a.min(b)];
                let (lo_b, hi_b) = &boxes[a.max(b)];
                let overlap = (0..3).all(|k| lo_a[k] <= hi_b[k] + 1e-12 && lo_b[k] <= hi_a[k] + 1e-12);
                if overlap {
                    candidates.insert((a.min(b), a.max(b)));
                }
            }
        }
    }

    let mut report = IntersectionReport::default();
    for (a, b) in candidates {
        let ta = mesh.triangles[a];
        let tb = mesh.triangles[b];
        if ta.iter().any(|v| tb.contains(v)) {
            continue;
        }
        let t1 = [mesh.vertices[ta[0]], mesh.vertices[ta[1]], mesh.vertices[ta[2]]];
        let t2 = [mesh.vertices[tb[0]], mesh.vertices[tb[1]], mesh.vertices[tb[2]]];
        // Covering-map meshes duplicate vertex positions under distinct
        // indices. Three matched positions mean the triangles are the same
        // coincident sheet; one or two mean geometric adjacency, excluded
        // exactly like index-sharing neighbors.
        let matched = t1
            .iter()
            .filter(|v| t2.iter().any(|w| norm(&sub(v, w)) < tau_coinc))
            .count();
        if matched >= 3 {
            report.coincident.push((a, b));
            continue;
        }
        if matched > 0 {
            continue;
        }
        match classify_pair(&t1, &t2, tau_coinc) {
            PairKind::Coincident => report.coincident.push((a, b)),
            PairKind::Transversal => report.transversal.push((a, b)),
            PairKind::Disjoint => {}
        }
    }
    report
}

enum PairKind {
    Disjoint,
    Transversal,
    Coincident,
}

fn plane(t: &[[f64; 3]; 3]) -> ([f64; 3], f64) {
    let n = cross(&sub(&t[1], &t[0]), &sub(&t[2], &t[0]));
    let len = norm(&n);
    let n = [n[0] / len, n[1] / len, n[2] / len];
    (n, -dot(&n, &t[0]))
}

fn classify_pair(t1: &[[f64; 3]; 3], t2: &[[f64; 3]; 3], tau_coinc: f64) -> PairKind {
    let (n1, d1) = plane(t1);
    let (n2, d2) = plane(t2);
    let dist2: Vec<f64> = t2.iter().map(|v| dot(&n1, v) + d1).collect();
    let dist1: Vec<f64> = t1.iter().map(|v| dot(&n2, v) + d2).collect();
    let coplanar =
        dist2.iter().all(|d| d.abs() <= tau_coinc) && dist1.iter().all(|d| d.abs() <= tau_coinc);
    if coplanar {
        if coplanar_overlap(t1, t2, &n1) {
            return PairKind::Coincident;
        }
        return PairKind::Disjoint;
    }
    if tri_tri_intersects(t1, t2) {
        PairKind::Transversal
    } else {
        PairKind::Disjoint
    }
}

/// Moeller interval test.
fn tri_tri_intersects(t1: &[[f64; 3]; 3], t2: &[[f64; 3]; 3]) -> bool {
    const EPS: f64 = 1e-13;
    let (n2, d2) = plane(t2);
    let du: Vec<f64> = t1.iter().map(|v| dot(&n2, v) + d2).collect();
    if du.iter().all(|d| *d > EPS) || du.iter().all(|d| *d < -EPS) {
        return false;
    }
    let (n1, d1) = plane(t1);
    let dv: Vec<f64> = t2.iter().map(|v| dot(&n1, v) + d1).collect();
    if dv.iter().all(|d| *d > EPS) || dv.iter().all(|d| *d < -EPS) {
        return false;
    }
    let dir = cross(&n1, &n2);
    let mut axis = 0;
    for k in 1..3 {
        if dir[k].abs() > dir[axis].abs() {
            axis = k;
        }
    }
    if dir[axis].abs() < EPS {
        // Nearly coplanar but outside the coincidence tolerance: fall back
        // to the 2D overlap test.
        return coplanar_overlap(t1, t2, &n1);
    }
    let i1 = line_interval(t1, &du, axis);
    let i2 = line_interval(t2, &dv, axis);
    match (i1, i2) {
        (Some((a0, a1)), Some((b0, b1))) => a0.max(b0) <= a1.min(b1) + EPS,
        _ => false,
    }
}

/// Projection interval of the triangle's crossing segment on the shared
/// line, following the interval method: for each edge that crosses the
/// plane, interpolate the projected coordinate.
fn line_interval(t: &[[f64; 3]; 3], d: &[f64], axis: usize) -> Option<(f64, f64)> {
    const EPS: f64 = 1e-13;
    let p: Vec<f64> = t.iter().map(|v| v[axis]).collect();
    let mut crossings = Vec::new();
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let (di, dj) = (d[i], d[j]);
        if (di > EPS && dj > EPS) || (di < -EPS && dj < -EPS) {
            continue;
        }
        if (di - dj).abs() <= EPS {
            // Edge lies in the plane: take both endpoints.
            crossings.push(p[i]);
            crossings.push(p[j]);
        } else {
            let t_param = di / (di - dj);
            if (-EPS..=1.0 + EPS).contains(&t_param) {
                crossings.push(p[i] + t_param * (p[j] - p[i]));
            }
        }
    }
    if crossings.is_empty() {
        return None;
    }
    let lo = crossings.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = crossings.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some((lo, hi))
}

/// 2D overlap of coplanar triangles: any edge pair intersecting, or one
/// triangle containing the other's vertex.
fn coplanar_overlap(t1: &[[f64; 3]; 3], t2: &[[f64; 3]; 3], n: &[f64; 3]) -> bool {
    let mut axis = 0;
    for k in 1..3 {
        if n[k].abs() > n[axis].abs() {
            axis = k;
        }
    }
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let proj = |p: &[f64; 3]| [p[u], p[v]];
    let a: Vec<[f64; 2]> = t1.iter().map(proj).collect();
    let b: Vec<[f64; 2]> = t2.iter().map(proj).collect();
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect(&a[i], &a[(i + 1) % 3], &b[j], &b[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_tri(&b[0], &a) || point_in_tri(&a[0], &b)
}

fn orient2d(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2], d: &[f64; 2]) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn point_in_tri(p: &[f64; 2], t: &[[f64; 2]]) -> bool {
    let d1 = orient2d(&t[0], &t[1], p);
    let d2 = orient2d(&t[1], &t[2], p);
    let d3 = orient2d(&t[2], &t[0], p);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// Default coincidence tolerance re-export for callers.
pub fn default_tau_coinc() -> f64 {
    TAU_COINC
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn sphere_mesh_is_closed_with_euler_characteristic_two() {
        let entry = catalog::geodesic_sphere(1.0);
        let mesh = sample_mesh(&entry.chart, 32, 0.0).unwrap();
        assert_eq!(mesh.euler_characteristic(), 2);
        assert!(mesh.max_ball_norm() < 0.5f64.tanh() + 1e-12);
    }

    #[test]
    fn equidistant_mesh_is_a_tube_inside_the_ball() {
        let entry = catalog::equidistant(0.5, 1).unwrap();
        let mesh = sample_mesh(&entry.chart, 32, 3.0).unwrap();
        // Tube: chi = 0 for the open cylinder grid.
        assert_eq!(mesh.euler_characteristic(), 0);
        assert!(mesh.max_ball_norm() < 1.0);
    }

    #[test]
    fn horosphere_mesh_norms_approach_one_with_extent() {
        let entry = catalog::horosphere(0.0);
        let mut last = 0.0;
        for extent in [2.0, 4.0, 8.0] {
            let mesh = sample_mesh(&entry.chart, 16, extent).unwrap();
            let norm = mesh.max_ball_norm();
            assert!(norm > last);
            last = norm;
        }
        assert!(last > 0.9);
    }

    #[test]
    fn tri_tri_detects_crossing_and_rejects_separated() {
        let t1 = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let t2 = [[0.2, 0.2, -0.5], [0.2, 0.2, 0.5], [0.8, 0.8, 0.3]];
        assert!(tri_tri_intersects(&t1, &t2));
        let t3 = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];
        assert!(!tri_tri_intersects(&t1, &t3));
    }

    #[test]
    fn off_export_has_header_and_counts() {
        let entry = catalog::geodesic_sphere(1.0);
        let mesh = sample_mesh(&entry.chart, 8, 0.0).unwrap();
        let off = mesh.to_off();
        let mut lines = off.lines();
        assert_eq!(lines.next(), Some("OFF"));
        let counts: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(counts[0], mesh.vertices.len());
        assert_eq!(counts[1], mesh.triangles.len());
    }

    #[test]
    fn sphere_has_no_self_intersections() {
        let entry = catalog::geodesic_sphere(1.0);
        let mesh = sample_mesh(&entry.chart, 32, 0.0).unwrap();
        let rep = self_intersect(&mesh, default_tau_coinc());
        assert!(rep.transversal.is_empty());
        assert!(rep.coincident.is_empty());
    }

    #[test]
    fn double_wrap_reports_coincident_sheets_only() {
        let entry = catalog::equidistant(0.5, 2).unwrap();
        let mesh = sample_mesh(&entry.chart, 24, 2.0).unwrap();
        let rep = self_intersect(&mesh, default_tau_coinc());
        assert!(rep.transversal.is_empty(), "transversal: {:?}", rep.transversal.len());
        assert!(!rep.coincident.is_empty());
    }

    #[test]
    fn limacon_cylinder_has_transversal_intersections() {
        let entry = catalog::limacon_cylinder(0.015).unwrap();
        let mesh = sample_mesh(&entry.chart, 64, 3.0).unwrap();
        let rep = self_intersect(&mesh, default_tau_coinc());
        assert!(!rep.transversal.is_empty());
    }
}
