//! Command line front end: selector parsing, the per-subcommand pipelines,
//! and deterministic report assembly.
//!
//! Selectors use the grammar `name:key=value,key=value` with
//! locale-independent float parsing; unknown names or keys are usage errors
//! (exit 2). Numerical failures inside a run exit 1 with a diagnostic JSON
//! on stdout; success exits 0.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::catalog::{self, CatalogEntry};
use crate::conformal::{self, PlaneConformalGrid};
use crate::embed_probe;
use crate::horospherical;
use crate::normal_flow::FlowState;
use crate::pde::{solve_curvature_equation, CurvatureProblem};
use crate::report;
use crate::surface::{self, ConvexityReport};
use crate::tol::Tolerances;
use crate::{Error, Result};

/// Output format of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// One parsed invocation.
#[derive(Clone)]
pub struct RunConfig {
    pub command: Command,
    pub format: OutputFormat,
    pub out_path: Option<String>,
    pub tolerances: Tolerances,
}

#[derive(Clone)]
pub enum Command {
    Classify { surface: String, grid: usize, include_diagonal: bool },
    Horo { surface: String, grid: usize },
    Flow { surface: String, t: f64, probe: bool },
    Growth { metric: String, r_min: f64, r_max: f64, n_r: usize, n_theta: usize },
    Pde { case: String, size: usize, radius: f64, max_iter: usize },
    Probe { surface: String, resolution: usize, extent: f64, samples: usize, mesh_out: Option<String> },
    Catalog,
}

/// Finished run: report text, exit status, and side files to write.
pub struct RunOutput {
    pub text: String,
    pub exit: i32,
    pub files: Vec<(String, String)>,
}

/// Parse `name:key=value,...` into the name and key map, rejecting
/// duplicate keys.
fn parse_selector(selector: &str) -> Result<(String, BTreeMap<String, String>)> {
    let (name, rest) = match selector.split_once(':') {
        Some((n, r)) => (n, r),
        None => (selector, ""),
    };
    let mut map = BTreeMap::new();
    if !rest.is_empty() {
        for pair in rest.split(',') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("bad selector fragment '{pair}'")))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Usage(format!("duplicate selector key '{k}'")));
            }
        }
    }
    Ok((name.trim().to_string(), map))
}

fn take_f64(map: &mut BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.remove(key) {
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| Error::Usage(format!("selector key '{key}' is not a number: {v}"))),
        None => Ok(default),
    }
}

fn take_usize(map: &mut BTreeMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match map.remove(key) {
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| Error::Usage(format!("selector key '{key}' is not an integer: {v}"))),
        None => Ok(default),
    }
}

fn reject_unknown(name: &str, map: BTreeMap<String, String>) -> Result<()> {
    if let Some(key) = map.keys().next() {
        return Err(Error::Usage(format!("unknown key '{key}' for selector '{name}'")));
    }
    Ok(())
}

/// Resolve a surface selector to a catalog entry.
pub fn resolve_surface(selector: &str) -> Result<CatalogEntry> {
    let (name, mut map) = parse_selector(selector)?;
    let entry = match name.as_str() {
        "horosphere" => {
            let distance = take_f64(&mut map, "distance", 0.0)?;
            let orientation = map.remove("orientation").unwrap_or_else(|| "standard".into());
            let entry = match orientation.as_str() {
                "standard" => catalog::horosphere(distance),
                "flipped" => catalog::horosphere_flipped(distance),
                other => {
                    return Err(Error::Usage(format!(
                        "orientation must be standard|flipped, got '{other}'"
                    )))
                }
            };
            reject_unknown(&name, map)?;
            entry
        }
        "equidistant" => {
            let d = take_f64(&mut map, "d", 0.5)?;
            let wraps = take_usize(&mut map, "wraps", 1)?;
            reject_unknown(&name, map)?;
            catalog::equidistant(d, wraps)?
        }
        "geodesic_sphere" => {
            let r = take_f64(&mut map, "r", 1.0)?;
            reject_unknown(&name, map)?;
            if r <= 0.0 {
                return Err(Error::Usage("geodesic_sphere needs r > 0".into()));
            }
            catalog::geodesic_sphere(r)
        }
        "limacon_cylinder" => {
            let scale = take_f64(&mut map, "scale", 0.015)?;
            reject_unknown(&name, map)?;
            catalog::limacon_cylinder(scale)?
        }
        other => return Err(Error::Usage(format!("unknown surface '{other}'"))),
    };
    Ok(entry)
}

/// Resolve a metric selector to a conformal grid.
pub fn resolve_metric(
    selector: &str,
    r_min: f64,
    r_max: f64,
    n_r: usize,
    n_theta: usize,
) -> Result<(String, PlaneConformalGrid)> {
    let (name, mut map) = parse_selector(selector)?;
    match name.as_str() {
        "model" => {
            let m = take_f64(&mut map, "m", f64::NAN)?;
            if m.is_nan() {
                return Err(Error::Usage("model metric needs m=<value>".into()));
            }
            reject_unknown(&name, map)?;
            Ok((format!("model:m={m}"), catalog::model_metric(m, r_min, r_max, n_r, n_theta)?))
        }
        "flat" => {
            reject_unknown(&name, map)?;
            Ok(("flat".into(), catalog::flat_metric(r_min, r_max, n_r, n_theta)?))
        }
        "round" => {
            reject_unknown(&name, map)?;
            Ok(("round".into(), catalog::round_metric(r_min, r_max, n_r, n_theta)?))
        }
        other => Err(Error::Usage(format!("unknown metric '{other}'"))),
    }
}

fn sample_grid(entry: &CatalogEntry, grid: usize, fd_margin: f64) -> Vec<Vec<f64>> {
    let chart = &entry.chart;
    let axis_vals = |axis: usize| -> Vec<f64> {
        match chart.periodic[axis] {
            Some(period) => (0..grid).map(|k| period * k as f64 / grid as f64).collect(),
            None => {
                let (lo, hi) = chart.domain[axis];
                (0..grid)
                    .map(|k| {
                        lo + fd_margin
                            + (hi - lo - 2.0 * fd_margin) * k as f64 / (grid as f64 - 1.0)
                    })
                    .collect()
            }
        }
    };
    let us = axis_vals(0);
    let vs = axis_vals(1);
    let mut out = Vec::with_capacity(us.len() * vs.len());
    for u in &us {
        for v in &vs {
            out.push(vec![*u, *v]);
        }
    }
    out
}

#[derive(Serialize)]
struct ClassifyReport {
    surface: String,
    grid: usize,
    kappa_min: Vec<f64>,
    kappa_max: Vec<f64>,
    kappa_at_sample: Vec<f64>,
    flags: ConvexityReport,
    jet_residual_max: f64,
}

fn run_classify(
    surface: &str,
    grid: usize,
    include_diagonal: bool,
    tol: &Tolerances,
) -> Result<(ClassifyReport, i32)> {
    let entry = resolve_surface(surface)?;
    let points = sample_grid(&entry, grid.max(2), 4.0 * entry.chart.fd_step);
    let mut kappa_min: Option<Vec<f64>> = None;
    let mut kappa_max: Option<Vec<f64>> = None;
    let mut jet_residual_max = 0.0f64;
    let mut flags: Option<ConvexityReport> = None;
    for p in &points {
        let jet = surface::jet(&entry.chart, p)?;
        jet_residual_max = jet_residual_max.max(jet.residual);
        let pr = surface::principal(&jet)?;
        let rep = surface::classify_with_slack(&pr.curvatures, include_diagonal, 1e-12);
        match (&mut kappa_min, &mut kappa_max) {
            (Some(lo), Some(hi)) => {
                for (i, k) in pr.curvatures.iter().enumerate() {
                    lo[i] = lo[i].min(*k);
                    hi[i] = hi[i].max(*k);
                }
            }
            _ => {
                kappa_min = Some(pr.curvatures.clone());
                kappa_max = Some(pr.curvatures.clone());
            }
        }
        flags = Some(match flags.take() {
            None => rep,
            Some(acc) => ConvexityReport {
                convex: acc.convex && rep.convex,
                nonneg_ricci: acc.nonneg_ricci && rep.nonneg_ricci,
                nonneg_sectional: acc.nonneg_sectional && rep.nonneg_sectional,
                horo_convex: acc.horo_convex && rep.horo_convex,
                weakly_horo_convex: acc.weakly_horo_convex && rep.weakly_horo_convex,
                witness_convex: acc.witness_convex.or(rep.witness_convex),
                witness_ricci: acc.witness_ricci.or(rep.witness_ricci),
                witness_sectional: acc.witness_sectional.or(rep.witness_sectional),
                witness_horo: acc.witness_horo.or(rep.witness_horo),
                witness_weak: acc.witness_weak.or(rep.witness_weak),
            },
        });
    }
    let sample_jet = surface::jet(&entry.chart, &entry.sample_point)?;
    let kappa_at_sample = surface::principal(&sample_jet)?.curvatures;
    let exit = if jet_residual_max > tol.jet { 1 } else { 0 };
    Ok((
        ClassifyReport {
            surface: entry.name.clone(),
            grid,
            kappa_min: kappa_min.unwrap(),
            kappa_max: kappa_max.unwrap(),
            kappa_at_sample,
            flags: flags.unwrap(),
            jet_residual_max,
        },
        exit,
    ))
}

#[derive(Serialize)]
struct HoroReport {
    surface: String,
    grid: usize,
    rho_min: f64,
    rho_max: f64,
    metric_relation_max: f64,
    gauss_route_max: f64,
    g_h_positive_everywhere: bool,
    sectional_min: f64,
    sectional_max: f64,
    /// P-tensor eigenvalue range across samples (with respect to the
    /// horospherical metric); strictly inside (-1/2, 1/2) for nonnegatively
    /// curved surfaces.
    p_eigen_min: f64,
    p_eigen_max: f64,
}

fn run_horo(surface: &str, grid: usize) -> Result<(HoroReport, i32)> {
    let entry = resolve_surface(surface)?;
    let points = sample_grid(&entry, grid.max(2), 4.0 * entry.chart.fd_step);
    let mut rho_min = f64::INFINITY;
    let mut rho_max = f64::NEG_INFINITY;
    let mut g_h_positive = true;
    let mut sectional_min = f64::INFINITY;
    let mut sectional_max = f64::NEG_INFINITY;
    let mut p_eigen_min = f64::INFINITY;
    let mut p_eigen_max = f64::NEG_INFINITY;
    for p in &points {
        let jet = surface::jet(&entry.chart, p)?;
        let pr = surface::principal(&jet)?;
        let data = horospherical::light_cone(&jet)?;
        rho_min = rho_min.min(data.rho);
        rho_max = rho_max.max(data.rho);
        g_h_positive &= data.g_h_positive;
        if pr.curvatures.iter().all(|k| *k > -1.0) {
            let tensors = horospherical::curvature_tensors(&pr, &data.g_h)?;
            for (_, k) in &tensors.sectional {
                sectional_min = sectional_min.min(*k);
                sectional_max = sectional_max.max(*k);
            }
            for k in &pr.curvatures {
                let lam = 0.5 - 1.0 / (1.0 + k);
                p_eigen_min = p_eigen_min.min(lam);
                p_eigen_max = p_eigen_max.max(lam);
            }
        }
    }
    // Metric-relation residuals on a coarse subgrid (finite differencing the
    // light cone map is expensive).
    let coarse = sample_grid(&entry, 4, 8.0 * entry.chart.fd_step);
    let mut metric_relation_max = 0.0f64;
    let mut gauss_route_max = 0.0f64;
    for p in &coarse {
        let rep = horospherical::metric_relation_residual(&entry.chart, p)?;
        metric_relation_max = metric_relation_max.max(rep.psi_residual);
        gauss_route_max = gauss_route_max.max(rep.gauss_residual);
    }
    let exit = if metric_relation_max > 1e-3 || !g_h_positive { 1 } else { 0 };
    Ok((
        HoroReport {
            surface: entry.name.clone(),
            grid,
            rho_min,
            rho_max,
            metric_relation_max,
            gauss_route_max,
            g_h_positive_everywhere: g_h_positive,
            sectional_min,
            sectional_max,
            p_eigen_min,
            p_eigen_max,
        },
        exit,
    ))
}

#[derive(Serialize)]
struct FlowReport {
    surface: String,
    t: f64,
    kappa_initial: Vec<f64>,
    state: FlowState,
    /// Table of evolved curvatures at intermediate times.
    table: Vec<FlowState>,
    /// Max relative error of numerically re-derived curvatures of the
    /// flowed surface against the closed form (equidistant surfaces only).
    probe_kappa_error: Option<f64>,
}

fn run_flow(surface: &str, t: f64, probe: bool) -> Result<(FlowReport, i32)> {
    let entry = resolve_surface(surface)?;
    let jet = surface::jet(&entry.chart, &entry.sample_point)?;
    let kappa = surface::principal(&jet)?.curvatures;
    let state = FlowState::evolve(&kappa, t)?;
    let mut table = Vec::new();
    for k in 0..=8 {
        table.push(FlowState::evolve(&kappa, t * k as f64 / 8.0)?);
    }
    let mut probe_kappa_error = None;
    if probe {
        let (name, mut map) = parse_selector(surface)?;
        if name == "equidistant" {
            let d = take_f64(&mut map, "d", 0.5)?;
            let chart = catalog::equidistant_flow_chart(d, t);
            let j = surface::jet(&chart, &[0.3, 1.1])?;
            let got = surface::principal(&j)?.curvatures;
            let mut want = vec![
                crate::normal_flow::flow_curvature(d.tanh(), t)?,
                crate::normal_flow::flow_curvature(1.0 / d.tanh(), t)?,
            ];
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut err = 0.0f64;
            for (g, w) in got.iter().zip(&want) {
                err = err.max(((g - w) / w).abs());
            }
            probe_kappa_error = Some(err);
        }
    }
    let exit = match probe_kappa_error {
        Some(e) if e > 1e-5 => 1,
        _ => 0,
    };
    Ok((
        FlowReport {
            surface: entry.name.clone(),
            t,
            kappa_initial: kappa,
            state,
            table,
            probe_kappa_error,
        },
        exit,
    ))
}

#[derive(Serialize)]
struct GrowthRunReport {
    metric: String,
    r_min: f64,
    r_max: f64,
    n_r: usize,
    n_theta: usize,
    incomplete_flag: bool,
    report: conformal::GrowthReport,
}

fn run_growth(
    metric: &str,
    r_min: f64,
    r_max: f64,
    n_r: usize,
    n_theta: usize,
) -> Result<(GrowthRunReport, PlaneConformalGrid, i32)> {
    let (name, field) = resolve_metric(metric, r_min, r_max, n_r, n_theta)?;
    let rep = conformal::growth_exponent(&field)?;
    let exit = 0;
    Ok((
        GrowthRunReport {
            metric: name,
            r_min,
            r_max,
            n_r,
            n_theta,
            incomplete_flag: field.incomplete_flag,
            report: rep,
        },
        field,
        exit,
    ))
}

#[derive(Serialize)]
struct PdeReport {
    case: String,
    size: usize,
    radius: f64,
    iterations: usize,
    residual: f64,
    max_error: f64,
    converged: bool,
}

fn run_pde(
    case: &str,
    size: usize,
    radius: f64,
    max_iter: usize,
    tol: &Tolerances,
) -> Result<(PdeReport, i32)> {
    let (name, mut map) = parse_selector(case)?;
    type Field2 = Box<dyn Fn(f64, f64) -> f64 + Sync>;
    let (u_exact, k): (Field2, Field2) =
        match name.as_str() {
            "model" => {
                let m = take_f64(&mut map, "m", f64::NAN)?;
                if m.is_nan() {
                    return Err(Error::Usage("pde case model needs m=<value>".into()));
                }
                reject_unknown(&name, map)?;
                (
                    Box::new(move |r: f64, _| -(m / 2.0) * (1.0 + r * r).ln()),
                    Box::new(move |r: f64, _| 2.0 * m * (1.0 + r * r).powf(m - 2.0)),
                )
            }
            "round" => {
                reject_unknown(&name, map)?;
                (
                    Box::new(|r: f64, _| 2.0f64.ln() - (1.0 + r * r).ln()),
                    Box::new(|_, _| 1.0),
                )
            }
            "flat" => {
                reject_unknown(&name, map)?;
                (Box::new(|_, _| 0.0), Box::new(|_, _| 0.0))
            }
            other => return Err(Error::Usage(format!("unknown pde case '{other}'"))),
        };
    let boundary = |t: f64| u_exact(radius, t);
    let problem = CurvatureProblem::on_disk(radius, size, &*k, &boundary)?
        .with_perturbed_guess(&*u_exact, 0.05);
    let grid = problem.grid.clone();
    let rep = solve_curvature_equation(&problem, tol.newton, max_iter)?;
    let mut max_error = 0.0f64;
    for i in 0..grid.n_r {
        for j in 0..grid.n_theta {
            max_error =
                max_error.max((rep.u[grid.idx(i, j)] - u_exact(grid.r(i), grid.theta(j))).abs());
        }
    }
    Ok((
        PdeReport {
            case: case.to_string(),
            size,
            radius,
            iterations: rep.iterations,
            residual: rep.residual,
            max_error,
            converged: rep.converged,
        },
        0,
    ))
}

#[derive(Serialize)]
struct CatalogListing {
    surfaces: Vec<CatalogSurface>,
    metrics: Vec<CatalogMetric>,
}

#[derive(Serialize)]
struct CatalogSurface {
    name: &'static str,
    selector: &'static str,
    expected_kappa: Option<Vec<f64>>,
    embedded: Option<bool>,
    boundary_points: Option<usize>,
}

#[derive(Serialize)]
struct CatalogMetric {
    name: &'static str,
    selector: &'static str,
}

fn run_catalog() -> CatalogListing {
    let horo = catalog::horosphere(0.0);
    let equi = catalog::equidistant(0.5, 1).expect("default equidistant");
    let sphere = catalog::geodesic_sphere(1.0);
    let lima = catalog::limacon_cylinder(0.015).expect("default limacon");
    CatalogListing {
        surfaces: vec![
            CatalogSurface {
                name: "horosphere",
                selector: "horosphere:distance=0[,orientation=standard|flipped]",
                expected_kappa: horo.expected.kappa,
                embedded: horo.expected.embedded,
                boundary_points: horo.expected.boundary_points,
            },
            CatalogSurface {
                name: "equidistant",
                selector: "equidistant:d=0.5,wraps=1",
                expected_kappa: equi.expected.kappa,
                embedded: equi.expected.embedded,
                boundary_points: equi.expected.boundary_points,
            },
            CatalogSurface {
                name: "geodesic_sphere",
                selector: "geodesic_sphere:r=1",
                expected_kappa: sphere.expected.kappa,
                embedded: sphere.expected.embedded,
                boundary_points: sphere.expected.boundary_points,
            },
            CatalogSurface {
                name: "limacon_cylinder",
                selector: "limacon_cylinder:scale=0.015",
                expected_kappa: lima.expected.kappa,
                embedded: lima.expected.embedded,
                boundary_points: lima.expected.boundary_points,
            },
        ],
        metrics: vec![
            CatalogMetric { name: "model family", selector: "model:m=0.5" },
            CatalogMetric { name: "flat plane", selector: "flat" },
            CatalogMetric { name: "round sphere factor", selector: "round" },
        ],
    }
}

/// Execute a run and assemble its output.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let tol = &config.tolerances;
    match &config.command {
        Command::Classify { surface, grid, include_diagonal } => {
            let (rep, exit) = run_classify(surface, *grid, *include_diagonal, tol)?;
            if config.format == OutputFormat::Csv {
                return Err(Error::Usage("classify emits JSON only".into()));
            }
            Ok(RunOutput { text: report::to_json(&rep)?, exit, files: vec![] })
        }
        Command::Horo { surface, grid } => {
            let (rep, exit) = run_horo(surface, *grid)?;
            if config.format == OutputFormat::Csv {
                return Err(Error::Usage("horo emits JSON only".into()));
            }
            Ok(RunOutput { text: report::to_json(&rep)?, exit, files: vec![] })
        }
        Command::Flow { surface, t, probe } => {
            let (rep, exit) = run_flow(surface, *t, *probe)?;
            if config.format == OutputFormat::Csv {
                return Err(Error::Usage("flow emits JSON only".into()));
            }
            Ok(RunOutput { text: report::to_json(&rep)?, exit, files: vec![] })
        }
        Command::Growth { metric, r_min, r_max, n_r, n_theta } => {
            let (rep, field, exit) = run_growth(metric, *r_min, *r_max, *n_r, *n_theta)?;
            let text = match config.format {
                OutputFormat::Json => report::to_json(&rep)?,
                OutputFormat::Csv => report::polar_grid_to_csv(&field),
            };
            Ok(RunOutput { text, exit, files: vec![] })
        }
        Command::Pde { case, size, radius, max_iter } => {
            let (rep, exit) = run_pde(case, *size, *radius, *max_iter, tol)?;
            if config.format == OutputFormat::Csv {
                return Err(Error::Usage("pde emits JSON only".into()));
            }
            Ok(RunOutput { text: report::to_json(&rep)?, exit, files: vec![] })
        }
        Command::Probe { surface, resolution, extent, samples, mesh_out } => {
            let entry = resolve_surface(surface)?;
            let (rep, mesh) = embed_probe::probe_surface(
                &entry.name,
                &entry.chart,
                entry.escape.as_ref(),
                *resolution,
                *extent,
                *samples,
                tol.coinc,
                tol.theta_sep,
            )?;
            if config.format == OutputFormat::Csv {
                return Err(Error::Usage("probe emits JSON only".into()));
            }
            let mut files = Vec::new();
            if let Some(path) = mesh_out {
                files.push((path.clone(), mesh.to_off()));
            }
            // Expected-embeddedness cross-check: a surface the catalog marks
            // embedded must report no transversal pairs.
            let exit = match entry.expected.embedded {
                Some(true) if rep.transversal_pairs > 0 => 1,
                _ => 0,
            };
            Ok(RunOutput { text: report::to_json(&rep)?, exit, files })
        }
        Command::Catalog => {
            let rep = run_catalog();
            Ok(RunOutput { text: report::to_json(&rep)?, exit: 0, files: vec![] })
        }
    }
}

/// Render an error as a diagnostic JSON document.
pub fn diagnostic_json(err: &Error) -> String {
    #[derive(Serialize)]
    struct Diagnostic {
        error: String,
        exit: i32,
    }
    report::to_json(&Diagnostic { error: err.to_string(), exit: err.exit_code() })
        .unwrap_or_else(|_| format!("{{\"error\":\"{err}\"}}\n"))
}
