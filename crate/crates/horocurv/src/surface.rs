//! Immersed hypersurface charts: jets, fundamental forms, shape operators,
//! principal curvatures, and the pointwise convexity classifications.
//!
//! Sign conventions. In an orthonormal frame of principal directions the
//! normal satisfies `d eta(e_i) = -kappa_i e_i`; equivalently the scalar
//! second fundamental form is `II_ij = <d_i d_j phi, eta>` and the shape
//! operator is `I^{-1} II`. Catalog surfaces orient their normals so that
//! all principal curvatures come out positive (geodesic spheres about the
//! center give `kappa = coth r`), which for a geodesic sphere means the
//! normal field points toward the center. With this pairing the light cone
//! map obeys `d psi(e_i) = (1 + kappa_i) e_i`.

use std::sync::Arc;

use crate::linalg::{self, Mat};
use crate::minkowski::{classify_quadric, minkowski_inner_unchecked, HyperquadricTag, SpacetimeVector};
use crate::tol::{FD_STEP, TAU_EIG, TAU_JET};
use crate::{Error, Result};

type MapFn = dyn Fn(&[f64]) -> SpacetimeVector + Send + Sync;
type D1Fn = dyn Fn(&[f64], usize) -> SpacetimeVector + Send + Sync;
type D2Fn = dyn Fn(&[f64], usize, usize) -> SpacetimeVector + Send + Sync;

/// How a chart produces first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// Topology hint used when triangulating the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshTopology {
    /// Plain open grid.
    OpenGrid,
    /// Second parameter is periodic (tube).
    Cylinder,
    /// Colatitude/longitude chart of a closed sphere; poles get fans.
    ClosedSphere,
}

/// A parametrized hypersurface patch `phi: U subset R^n -> H^{n+1}`.
#[derive(Clone)]
pub struct SurfaceChart {
    /// Parameter dimension n (ambient vectors have n + 2 entries).
    pub dim: usize,
    /// Per-axis parameter bounds.
    pub domain: Vec<(f64, f64)>,
    /// Period of each axis, if the chart closes up along it.
    pub periodic: Vec<Option<f64>>,
    /// Sign applied to the deterministic cross-product normal so that the
    /// finite-difference fallback agrees with the chart's analytic normal
    /// (analytic normals are used as supplied).
    pub orientation: f64,
    /// Finite-difference step for derivative fallbacks.
    pub fd_step: f64,
    pub mesh_topology: MeshTopology,
    map: Arc<MapFn>,
    d1: Option<Arc<D1Fn>>,
    d2: Option<Arc<D2Fn>>,
    normal: Option<Arc<MapFn>>,
}

impl SurfaceChart {
    /// Chart from a bare evaluator; derivatives by central differences.
    pub fn from_map(
        dim: usize,
        domain: Vec<(f64, f64)>,
        map: Arc<MapFn>,
    ) -> Self {
        SurfaceChart {
            dim,
            domain,
            periodic: vec![None; dim],
            orientation: 1.0,
            fd_step: FD_STEP,
            mesh_topology: MeshTopology::OpenGrid,
            map,
            d1: None,
            d2: None,
            normal: None,
        }
    }

    /// Attach hand-coded first and second derivatives.
    pub fn with_derivatives(mut self, d1: Arc<D1Fn>, d2: Arc<D2Fn>) -> Self {
        self.d1 = Some(d1);
        self.d2 = Some(d2);
        self
    }

    /// Attach a hand-coded oriented unit normal field.
    pub fn with_normal(mut self, normal: Arc<MapFn>) -> Self {
        self.normal = Some(normal);
        self
    }

    pub fn with_orientation(mut self, orientation: f64) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_periodic(mut self, periodic: Vec<Option<f64>>) -> Self {
        self.periodic = periodic;
        self
    }

    pub fn with_topology(mut self, t: MeshTopology) -> Self {
        self.mesh_topology = t;
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// Drop analytic derivative and normal evaluators, forcing the
    /// finite-difference path. Used for cross-validation.
    pub fn forced_finite_difference(mut self) -> Self {
        self.d1 = None;
        self.d2 = None;
        self.normal = None;
        self
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        if self.d1.is_some() && self.d2.is_some() {
            DerivativeMode::Analytic
        } else {
            DerivativeMode::FiniteDifference
        }
    }

    pub fn eval(&self, p: &[f64]) -> SpacetimeVector {
        (self.map)(p)
    }

    pub fn has_analytic_normal(&self) -> bool {
        self.normal.is_some()
    }

    /// Oriented unit normal, analytic when available.
    pub fn normal_at(&self, p: &[f64]) -> Result<SpacetimeVector> {
        match &self.normal {
            Some(n) => Ok(n(p)),
            None => {
                let d1 = self.first_derivatives(p);
                self.normal_from_frame(&self.eval(p), &d1)
            }
        }
    }

    pub fn first_derivatives(&self, p: &[f64]) -> Vec<SpacetimeVector> {
        match &self.d1 {
            Some(d1) => (0..self.dim).map(|i| d1(p, i)).collect(),
            None => (0..self.dim).map(|i| self.fd_first(p, i, self.fd_step)).collect(),
        }
    }

    pub fn second_derivatives(&self, p: &[f64]) -> Vec<Vec<SpacetimeVector>> {
        match &self.d2 {
            Some(d2) => (0..self.dim)
                .map(|i| (0..self.dim).map(|j| d2(p, i, j)).collect())
                .collect(),
            None => (0..self.dim)
                .map(|i| (0..self.dim).map(|j| self.fd_second(p, i, j, self.fd_step)).collect())
                .collect(),
        }
    }

    fn shifted(&self, p: &[f64], axis: usize, delta: f64) -> Vec<f64> {
        let mut q = p.to_vec();
        q[axis] += delta;
        q
    }

    fn fd_first(&self, p: &[f64], i: usize, h: f64) -> SpacetimeVector {
        let plus = self.eval(&self.shifted(p, i, h));
        let minus = self.eval(&self.shifted(p, i, -h));
        plus.sub(&minus).scale(0.5 / h)
    }

    fn fd_second(&self, p: &[f64], i: usize, j: usize, h: f64) -> SpacetimeVector {
        if i == j {
            let plus = self.eval(&self.shifted(p, i, h));
            let minus = self.eval(&self.shifted(p, i, -h));
            let center = self.eval(p);
            plus.add(&minus).axpy(-2.0, &center).scale(1.0 / (h * h))
        } else {
            let pp = self.eval(&self.shifted(&self.shifted(p, i, h), j, h));
            let pm = self.eval(&self.shifted(&self.shifted(p, i, h), j, -h));
            let mp = self.eval(&self.shifted(&self.shifted(p, i, -h), j, h));
            let mm = self.eval(&self.shifted(&self.shifted(p, i, -h), j, -h));
            pp.sub(&pm).sub(&mp).add(&mm).scale(0.25 / (h * h))
        }
    }

    /// Unit spacelike normal Minkowski-orthogonal to `phi` and the tangent
    /// frame, with deterministic sign fixed by the frame orientation and the
    /// chart's orientation flag.
    fn normal_from_frame(
        &self,
        phi: &SpacetimeVector,
        d1: &[SpacetimeVector],
    ) -> Result<SpacetimeVector> {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(self.dim + 1);
        rows.push(phi.coords.clone());
        for t in d1 {
            rows.push(t.coords.clone());
        }
        let c = linalg::generalized_cross(&rows)?;
        // Flip the time sign to convert Euclidean orthogonality into
        // Minkowski orthogonality.
        let mut v = c;
        v[0] = -v[0];
        let sv = SpacetimeVector::new(v);
        let norm2 = minkowski_inner_unchecked(&sv, &sv);
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::DegenerateFrame { cond: f64::INFINITY });
        }
        Ok(sv.scale(self.orientation / norm2.sqrt()))
    }

    /// Interior check with a margin (finite-difference stencils need room).
    pub fn check_interior(&self, p: &[f64], margin: f64) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        for (axis, (&x, &(lo, hi))) in p.iter().zip(&self.domain).enumerate() {
            if self.periodic[axis].is_some() {
                continue;
            }
            if x < lo + margin || x > hi - margin {
                return Err(Error::OutOfDomain { axis, value: x });
            }
        }
        Ok(())
    }
}

/// Position, tangent frame, unit normal, and fundamental forms of an
/// immersed hypersurface at one parameter point.
#[derive(Debug, Clone)]
pub struct ImmersionJet {
    pub position: SpacetimeVector,
    pub tangent_frame: Vec<SpacetimeVector>,
    pub normal: SpacetimeVector,
    pub first_form: Mat,
    pub second_form: Mat,
    /// Worst violation of the jet orthogonality/unit invariants.
    pub residual: f64,
}

impl ImmersionJet {
    /// Shape operator `I^{-1} II` in chart coordinates.
    pub fn shape_operator(&self) -> Result<Mat> {
        let lu = linalg::Lu::new(&self.first_form).map_err(|_| Error::DegenerateFrame {
            cond: f64::INFINITY,
        })?;
        Ok(lu.solve_mat(&self.second_form))
    }

    fn invariant_residual(&self) -> f64 {
        let eta = &self.normal;
        let mut r = (minkowski_inner_unchecked(eta, eta) - 1.0).abs();
        r = r.max(minkowski_inner_unchecked(eta, &self.position).abs());
        for t in &self.tangent_frame {
            r = r.max(minkowski_inner_unchecked(eta, t).abs());
            // Differentiating <phi, phi> = -1 forces tangency.
            r = r.max(minkowski_inner_unchecked(&self.position, t).abs());
        }
        r = r.max((minkowski_inner_unchecked(&self.position, &self.position) + 1.0).abs());
        r
    }
}

/// Compute the immersion jet at a parameter point.
///
/// In finite-difference mode a Richardson pass (steps `h` and `h/2`) kicks in
/// when the plain stencil leaves jet residuals above `tau_jet`.
pub fn jet(chart: &SurfaceChart, p: &[f64]) -> Result<ImmersionJet> {
    let margin = match chart.derivative_mode() {
        DerivativeMode::Analytic => 0.0,
        DerivativeMode::FiniteDifference => 2.0 * chart.fd_step,
    };
    chart.check_interior(p, margin)?;
    let j = jet_with_step(chart, p, chart.fd_step)?;
    if chart.derivative_mode() == DerivativeMode::FiniteDifference && j.residual > TAU_JET {
        let fine = jet_with_step(chart, p, chart.fd_step / 2.0)?;
        let rich = richardson_jet(chart, p, &j, &fine)?;
        if rich.residual < j.residual {
            return Ok(rich);
        }
    }
    Ok(j)
}

fn jet_with_step(chart: &SurfaceChart, p: &[f64], h: f64) -> Result<ImmersionJet> {
    let position = chart.eval(p);
    if classify_quadric(&position, 1e-6) != HyperquadricTag::Hyperbolic {
        return Err(Error::NotHyperbolic {
            inner: minkowski_inner_unchecked(&position, &position),
            x0: position.time(),
        });
    }
    let d1: Vec<SpacetimeVector> = match &chart.d1 {
        Some(f) => (0..chart.dim).map(|i| f(p, i)).collect(),
        None => (0..chart.dim).map(|i| chart.fd_first(p, i, h)).collect(),
    };
    let d2: Vec<Vec<SpacetimeVector>> = match &chart.d2 {
        Some(f) => (0..chart.dim)
            .map(|i| (0..chart.dim).map(|j| f(p, i, j)).collect())
            .collect(),
        None => (0..chart.dim)
            .map(|i| (0..chart.dim).map(|j| chart.fd_second(p, i, j, h)).collect())
            .collect(),
    };
    assemble_jet(chart, p, position, d1, d2)
}

fn richardson_jet(
    chart: &SurfaceChart,
    p: &[f64],
    coarse: &ImmersionJet,
    fine: &ImmersionJet,
) -> Result<ImmersionJet> {
    let extrap = |a: &SpacetimeVector, b: &SpacetimeVector| {
        // (4 D(h/2) - D(h)) / 3
        b.scale(4.0 / 3.0).axpy(-1.0 / 3.0, a)
    };
    let d1: Vec<SpacetimeVector> = coarse
        .tangent_frame
        .iter()
        .zip(&fine.tangent_frame)
        .map(|(a, b)| extrap(a, b))
        .collect();
    let n = chart.dim;
    let mut d2 = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let a = chart.fd_second(p, i, j, chart.fd_step);
            let b = chart.fd_second(p, i, j, chart.fd_step / 2.0);
            row.push(extrap(&a, &b));
        }
        d2.push(row);
    }
    assemble_jet(chart, p, coarse.position.clone(), d1, d2)
}

fn assemble_jet(
    chart: &SurfaceChart,
    p: &[f64],
    position: SpacetimeVector,
    d1: Vec<SpacetimeVector>,
    d2: Vec<Vec<SpacetimeVector>>,
) -> Result<ImmersionJet> {
    let n = chart.dim;
    let mut first = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            first[(i, j)] = minkowski_inner_unchecked(&d1[i], &d1[j]);
        }
    }
    let cond = linalg::sym_condition(&first);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::DegenerateFrame { cond });
    }
    let normal = match &chart.normal {
        Some(f) => f(p),
        None => chart.normal_from_frame(&position, &d1)?,
    };
    let mut second = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            second[(i, j)] = minkowski_inner_unchecked(&d2[i][j], &normal);
        }
    }
    let second = second.symmetrize();
    let mut jet = ImmersionJet {
        position,
        tangent_frame: d1,
        normal,
        first_form: first,
        second_form: second,
        residual: 0.0,
    };
    jet.residual = jet.invariant_residual();
    Ok(jet)
}

/// Principal curvatures (ascending) and the matching I-orthonormal frame of
/// principal directions, as chart-coordinate column vectors.
#[derive(Debug, Clone)]
pub struct PrincipalData {
    pub curvatures: Vec<f64>,
    pub directions: Mat,
}

impl PrincipalData {
    /// Synthetic data in an orthonormal frame; used by arithmetic-only
    /// curvature formulas and their tests.
    pub fn from_curvatures(kappa: &[f64]) -> Self {
        PrincipalData {
            curvatures: kappa.to_vec(),
            directions: Mat::identity(kappa.len()),
        }
    }
}

/// Eigen-decomposition of the shape operator.
pub fn principal(jet: &ImmersionJet) -> Result<PrincipalData> {
    let scale = jet.second_form.max_abs().max(1.0);
    let asym = jet.second_form.asymmetry();
    if asym > TAU_EIG * scale.max(1.0) * 10.0 {
        return Err(Error::NonSymmetric { residual: asym, tol: TAU_EIG });
    }
    let (vals, vecs) = linalg::sym_eigen_generalized(&jet.second_form, &jet.first_form)?;
    // Residual check: shape operator applied to each direction.
    let shape = jet.shape_operator()?;
    let n = vals.len();
    let mut worst = 0.0f64;
    for (k, val) in vals.iter().enumerate() {
        let dir = vecs.col(k);
        let sv = shape.matvec(&dir);
        for i in 0..n {
            worst = worst.max((sv[i] - val * dir[i]).abs());
        }
    }
    let tol = TAU_EIG * (1.0 + shape.max_abs());
    if worst > tol * 100.0 {
        return Err(Error::NonSymmetric { residual: worst, tol });
    }
    Ok(PrincipalData { curvatures: vals, directions: vecs })
}

/// Pointwise convexity flags. Witness indices are 1-based to match the
/// usual "kappa_1, ..., kappa_n" numbering; `None` means no violation.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConvexityReport {
    pub convex: bool,
    pub nonneg_ricci: bool,
    pub nonneg_sectional: bool,
    pub horo_convex: bool,
    pub weakly_horo_convex: bool,
    pub witness_convex: Option<usize>,
    pub witness_ricci: Option<usize>,
    pub witness_sectional: Option<(usize, usize)>,
    pub witness_horo: Option<usize>,
    pub witness_weak: Option<usize>,
}

/// Evaluate the convexity ladder exactly as stated (zero slack); see
/// [`classify_with_slack`] for the pipeline variant.
///
/// The ladder:
/// convex `kappa_i > 0`; nonnegative Ricci `kappa_i sum_k kappa_k >= n-1 +
/// kappa_i^2`; nonnegatively curved `kappa_i kappa_j >= 1` over `i != j`;
/// horospherically convex `kappa_i >= 1`; weakly so `kappa_i > -1` (strict:
/// a principal curvature exactly at -1 does not qualify).
///
/// Witnesses scan the curvatures in ascending order and report the first
/// violator's 1-based position in the input list. `include_diagonal`
/// switches the sectional test to run over all pairs including `i = j`, the
/// literal reading of the inequality list.
pub fn classify(kappa: &[f64], include_diagonal: bool) -> ConvexityReport {
    classify_with_slack(kappa, include_diagonal, 0.0)
}

/// Convexity ladder with a relative slack on the non-strict (`>=`)
/// comparisons. Catalog surfaces sit exactly on inequality boundaries
/// (equidistant tubes have `kappa_1 kappa_2 = 1`), so pipeline callers pass
/// a tiny slack to absorb eigenvalue roundoff; the strict comparisons
/// (`kappa_i > 0`, `kappa_i > -1`) stay exact.
// Negated comparisons are deliberate: NaN curvatures must count as
// violations of every condition.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn classify_with_slack(
    kappa: &[f64],
    include_diagonal: bool,
    slack: f64,
) -> ConvexityReport {
    let n = kappa.len();
    assert!(n >= 2, "classification needs n >= 2 curvatures");
    let sum: f64 = kappa.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| kappa[a].partial_cmp(&kappa[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut report = ConvexityReport {
        convex: true,
        nonneg_ricci: true,
        nonneg_sectional: true,
        horo_convex: true,
        weakly_horo_convex: true,
        witness_convex: None,
        witness_ricci: None,
        witness_sectional: None,
        witness_horo: None,
        witness_weak: None,
    };
    for &i in &order {
        let k = kappa[i];
        if report.convex && !(k > 0.0) {
            report.convex = false;
            report.witness_convex = Some(i + 1);
        }
        let ricci_rhs = (n as f64 - 1.0) + k * k;
        if report.nonneg_ricci && !(k * sum >= ricci_rhs - slack * (1.0 + ricci_rhs.abs())) {
            report.nonneg_ricci = false;
            report.witness_ricci = Some(i + 1);
        }
        if report.horo_convex && !(k >= 1.0 - slack * (1.0 + k.abs())) {
            report.horo_convex = false;
            report.witness_horo = Some(i + 1);
        }
        if report.weakly_horo_convex && !(k > -1.0) {
            report.weakly_horo_convex = false;
            report.witness_weak = Some(i + 1);
        }
    }
    'outer: for a in 0..n {
        for b in 0..n {
            let (i, j) = (order[a], order[b]);
            if i == j && !include_diagonal {
                continue;
            }
            let prod = kappa[i] * kappa[j];
            if !(prod >= 1.0 - slack * (1.0 + prod.abs())) {
                report.nonneg_sectional = false;
                report.witness_sectional = Some((i.min(j) + 1, i.max(j) + 1));
                break 'outer;
            }
        }
    }
    report
}
