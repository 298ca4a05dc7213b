//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities once it holds. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use horocurv::catalog;
use horocurv::conformal;
use horocurv::embed_probe::{self, EscapeSchedule};
use horocurv::horospherical;
use horocurv::mesh;
use horocurv::normal_flow;
use horocurv::pde::{solve_curvature_equation, CurvatureProblem};
use horocurv::plane_field::{PlaneField, PlaneTensorField};
use horocurv::surface;
use horocurv::tol::{TAU_COINC, THETA_SEP};

/// Criterion 1: the pointwise curvature-condition hierarchy holds with zero
/// violations on 1e5 random samples per dimension n in {2,...,5}, within a
/// 5 second budget.
#[test]
fn ac01_hierarchy_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x484f524f);
    let mut checked: u64 = 0;
    for n in 2..=5usize {
        for _ in 0..100_000 {
            let kappa: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..10.0)).collect();
            let sum: f64 = kappa.iter().sum();
            let horo = kappa.iter().all(|k| *k >= 1.0);
            let convex = kappa.iter().all(|k| *k > 0.0);
            let sectional = (0..n)
                .all(|i| (0..n).all(|j| i == j || kappa[i] * kappa[j] >= 1.0));
            let ricci =
                kappa.iter().all(|k| k * sum >= (n as f64 - 1.0) + k * k);
            // (a) horospherically convex implies nonnegatively curved.
            if horo {
                assert!(sectional, "hierarchy (a) violated at {kappa:?}");
            }
            // (b) strictly convex + nonnegatively curved implies Ricci.
            if convex && sectional {
                assert!(ricci, "hierarchy (b) violated at {kappa:?}");
            }
            // (c) nonnegative Ricci implies one strict sign.
            if ricci {
                let all_pos = kappa.iter().all(|k| *k > 0.0);
                let all_neg = kappa.iter().all(|k| *k < 0.0);
                assert!(all_pos || all_neg, "hierarchy (c) violated at {kappa:?}");
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "hierarchy suite took {elapsed:?}");
    println!(
        "AC01 hierarchy suite: PASS ({checked} samples, zero violations, {:.2}s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: metric relation residual <= 1e-6 with analytic jets and
/// <= 1e-3 with finite-difference jets on the three convex catalog surfaces.
#[test]
fn ac02_metric_relation() {
    let mut worst_analytic = 0.0f64;
    let mut worst_fd = 0.0f64;
    for entry in [
        catalog::horosphere(0.0),
        catalog::equidistant(0.5, 1).unwrap(),
        catalog::geodesic_sphere(1.0),
    ] {
        for p in [entry.sample_point.clone(), vec![0.9, 0.5]] {
            let rep = horospherical::metric_relation_residual(&entry.chart, &p).unwrap();
            worst_analytic = worst_analytic.max(rep.psi_residual).max(rep.gauss_residual);
            let fd = entry.chart.clone().forced_finite_difference();
            let rep_fd = horospherical::metric_relation_residual(&fd, &p).unwrap();
            worst_fd = worst_fd.max(rep_fd.psi_residual);
        }
    }
    assert!(worst_analytic <= 1e-6, "analytic residual {worst_analytic}");
    assert!(worst_fd <= 1e-3, "fd residual {worst_fd}");
    println!(
        "AC02 metric relation: PASS (analytic {worst_analytic:.2e}, finite-difference {worst_fd:.2e})"
    );
}

/// Criterion 3: the P-tensor trace reproduces
/// `(kappa_1 kappa_2 - 1) / ((1 + kappa_1)(1 + kappa_2))` within 1e-4 on the
/// catalog surfaces with horospherically convex charts, and the equidistant
/// trace vanishes to 1e-8.
#[test]
fn ac03_curvature_cross_check() {
    let cases: Vec<(String, horocurv::sphere_field::SphereField, Vec<f64>)> = vec![
        (
            "geodesic_sphere:r=1".into(),
            catalog::sphere_support_field(1.0, 65, 65),
            surface::principal(
                &surface::jet(&catalog::geodesic_sphere(1.0).chart, &[1.1, 0.7]).unwrap(),
            )
            .unwrap()
            .curvatures,
        ),
        (
            "equidistant:d=0.5".into(),
            catalog::equidistant_support_field(0.5, 65, 65),
            surface::principal(
                &surface::jet(&catalog::equidistant(0.5, 1).unwrap().chart, &[0.4, 1.2]).unwrap(),
            )
            .unwrap()
            .curvatures,
        ),
        (
            "horosphere:distance=0".into(),
            catalog::horosphere_support_field(0.0, 65, 65),
            surface::principal(
                &surface::jet(&catalog::horosphere(0.0).chart, &[0.4, -0.3]).unwrap(),
            )
            .unwrap()
            .curvatures,
        ),
    ];
    let mut worst = 0.0f64;
    let mut equidistant_trace = 0.0f64;
    for (name, rho, kappa) in &cases {
        let want = horospherical::horo_sectional(kappa[0], kappa[1]).unwrap();
        let p = horospherical::p_tensor_from_support(rho).unwrap();
        let (ra, rb) = p.interior();
        for i in ra.step_by(8) {
            for j in rb.clone().step_by(8) {
                let tr = p.trace[rho.idx(i, j)];
                worst = worst.max((tr - want).abs());
                if name.starts_with("equidistant") {
                    equidistant_trace = equidistant_trace.max(tr.abs());
                }
            }
        }
    }
    assert!(worst <= 1e-4, "trace residual {worst}");
    assert!(equidistant_trace <= 1e-8, "equidistant trace {equidistant_trace}");
    println!(
        "AC03 curvature cross-check: PASS (max trace residual {worst:.2e}, equidistant trace {equidistant_trace:.2e})"
    );
}

/// Criterion 4: flow exactness. Semigroup identity to 1e-12 over 1e4
/// samples; the numerically flowed equidistant tube matches the closed-form
/// curvature evolution to 1e-5 at t in {0.25, 1.0}; the sign of the
/// sectional curvature is preserved with zero violations over 1e5 samples.
#[test]
fn ac04_flow_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x464c4f57);
    // Forward-flow domain (t >= 0): no focal poles occur for kappa > -1,
    // and the tanh addition law is numerically clean away from poles.
    for _ in 0..10_000 {
        let kappa = rng.gen_range(-0.99..10.0);
        let s = rng.gen_range(0.0..2.0);
        let t = rng.gen_range(0.0..2.0);
        let two = normal_flow::flow_curvature(normal_flow::flow_curvature(kappa, s).unwrap(), t)
            .unwrap();
        let one = normal_flow::flow_curvature(kappa, s + t).unwrap();
        assert!(
            (two - one).abs() <= 1e-12 * (1.0 + one.abs()),
            "semigroup violated at kappa={kappa}, s={s}, t={t}"
        );
    }
    for _ in 0..100_000 {
        let ki = rng.gen_range(-0.99..10.0);
        let kj = rng.gen_range(-0.99..10.0);
        let t = rng.gen_range(1e-6..5.0);
        let k_ij = ki * kj - 1.0;
        let kt = normal_flow::flow_sectional(k_ij, ki, kj, t).unwrap();
        if k_ij != 0.0 {
            assert_eq!(kt.signum(), k_ij.signum(), "sign flip at ({ki}, {kj}, {t})");
        }
    }
    let d = 0.5f64;
    let mut worst = 0.0f64;
    for t in [0.25, 1.0] {
        let chart = catalog::equidistant_flow_chart(d, t);
        for p in [[0.3, 1.1], [-0.8, 4.0]] {
            let got = surface::principal(&surface::jet(&chart, &p).unwrap())
                .unwrap()
                .curvatures;
            let mut want = vec![
                normal_flow::flow_curvature(d.tanh(), t).unwrap(),
                normal_flow::flow_curvature(1.0 / d.tanh(), t).unwrap(),
            ];
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (g, w) in got.iter().zip(&want) {
                worst = worst.max(((g - w) / w).abs());
            }
        }
    }
    assert!(worst <= 1e-5, "flowed-surface curvature error {worst}");
    println!(
        "AC04 flow exactness: PASS (semigroup 1e4 samples, sign preservation 1e5 samples, flowed-kappa error {worst:.2e})"
    );
}

/// Criterion 5: flat classification. The metric `e^{-2 rho}|dz|^2` built
/// from the flat-case support function has curvature 1 within 1e-6 on a
/// 256^2 grid, and the P0 of the flat decomposition is trace-free to 1e-4
/// and divergence-free to 1e-3.
#[test]
fn ac05_flat_classification() {
    let grid = horocurv::plane_field::PlaneGrid::square(4.0, 256);
    let rho = conformal::flat_support(0.5, (0.0, 0.0), grid.clone()).unwrap();
    let k = conformal::flat_support_curvature(&rho).unwrap();
    let mut worst_k = 0.0f64;
    for v in k.iter().filter(|v| v.is_finite()) {
        worst_k = worst_k.max((v - 1.0).abs());
    }
    assert!(worst_k <= 1e-6, "curvature residual {worst_k}");

    let rho_flat = PlaneField::constant(grid.clone(), 0.0);
    let p_tilde = PlaneTensorField::zeros(grid);
    let rep = horospherical::p0_decompose(Some(&rho), &rho_flat, &p_tilde).unwrap();
    assert!(rep.trace_max <= 1e-4, "P0 trace {}", rep.trace_max);
    assert!(rep.divergence_max <= 1e-3, "P0 divergence {}", rep.divergence_max);
    println!(
        "AC05 flat classification: PASS (curvature residual {worst_k:.2e}, P0 trace {:.2e}, divergence {:.2e})",
        rep.trace_max, rep.divergence_max
    );
}

/// Criterion 6: growth estimate. For the model family with m in
/// {0.25, 0.5, 1.0}: m_fit within 5% and m_flux within 2% at r_max = 1e3,
/// each case under 10 seconds; a flat input returns zero exactly.
#[test]
fn ac06_growth_estimate() {
    let mut lines = Vec::new();
    for m in [0.25, 0.5, 1.0] {
        let start = Instant::now();
        let field = catalog::model_metric(m, 0.1, 1000.0, 256, 256).unwrap();
        let rep = conformal::growth_exponent(&field).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        assert!(
            (rep.m_fit - m).abs() <= 0.05 * m,
            "m={m}: m_fit {} off by more than 5%",
            rep.m_fit
        );
        assert!(
            (rep.m_flux - m).abs() <= 0.02 * m,
            "m={m}: m_flux {} off by more than 2%",
            rep.m_flux
        );
        assert!(elapsed < 10.0, "m={m} took {elapsed}s");
        lines.push(format!("m={m}: fit {:.4}, flux {:.4}, {:.2}s", rep.m_fit, rep.m_flux, elapsed));
    }
    let flat = catalog::flat_metric(0.1, 1000.0, 256, 256).unwrap();
    let rep = conformal::growth_exponent(&flat).unwrap();
    assert_eq!(rep.m_flux, 0.0);
    assert!(rep.m_fit.abs() < 1e-12);
    println!("AC06 growth estimate: PASS ({}; flat -> 0)", lines.join("; "));
}

/// Criterion 7: total-curvature identity. The flux agrees with the boundary
/// derivative `-r ubar'(r)` within 0.02 on the model family, and the flux is
/// strictly positive for every nonflat nonnegatively curved catalog metric.
#[test]
fn ac07_total_curvature_identity() {
    let mut worst = 0.0f64;
    for m in [0.25, 0.5, 1.0] {
        let field = catalog::model_metric(m, 0.1, 1000.0, 256, 64).unwrap();
        let rep = conformal::growth_exponent(&field).unwrap();
        worst = worst.max(rep.boundary_vs_flux);
        assert!(rep.boundary_vs_flux <= 0.02, "m={m}: |flux - boundary| {}", rep.boundary_vs_flux);
    }
    for (name, field) in [
        ("model:m=0.25", catalog::model_metric(0.25, 0.1, 1000.0, 192, 32).unwrap()),
        ("model:m=0.5", catalog::model_metric(0.5, 0.1, 1000.0, 192, 32).unwrap()),
        ("model:m=1", catalog::model_metric(1.0, 0.1, 1000.0, 192, 32).unwrap()),
        ("round", catalog::round_metric(0.1, 1000.0, 192, 32).unwrap()),
    ] {
        let rep = conformal::growth_exponent(&field).unwrap();
        assert!(rep.m_flux > 0.0, "{name}: flux {} not positive", rep.m_flux);
        assert!(!rep.negative_curvature_flag, "{name} flagged negative curvature");
    }
    println!("AC07 total-curvature identity: PASS (max |flux - boundary| {worst:.3e}, nonflat fluxes positive)");
}

/// Criterion 8: the curvature-equation solver recovers manufactured
/// solutions (model family and round factor) to 1e-4 max-norm on 128^2 disk
/// grids with Newton converging in at most 12 iterations.
#[test]
fn ac08_pde_manufactured() {
    let mut lines = Vec::new();
    for (name, m) in [("model:m=0.5", Some(0.5)), ("round", None)] {
        let u_exact: Box<dyn Fn(f64, f64) -> f64 + Sync> = match m {
            Some(m) => Box::new(move |r: f64, _| -(m / 2.0) * (1.0 + r * r).ln()),
            None => Box::new(|r: f64, _| 2.0f64.ln() - (1.0 + r * r).ln()),
        };
        let k: Box<dyn Fn(f64, f64) -> f64 + Sync> = match m {
            Some(m) => Box::new(move |r: f64, _| 2.0 * m * (1.0 + r * r).powf(m - 2.0)),
            None => Box::new(|_, _| 1.0),
        };
        let problem = CurvatureProblem::on_disk(10.0, 128, &*k, &|t| u_exact(10.0, t))
            .unwrap()
            .with_perturbed_guess(&*u_exact, 0.05);
        let grid = problem.grid.clone();
        let rep = solve_curvature_equation(&problem, 1e-10, 50).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 12, "{name}: {} iterations", rep.iterations);
        let mut err = 0.0f64;
        for i in 0..grid.n_r {
            for j in 0..grid.n_theta {
                err = err
                    .max((rep.u[grid.idx(i, j)] - u_exact(grid.r(i), grid.theta(j))).abs());
            }
        }
        assert!(err <= 1e-4, "{name}: max error {err}");
        lines.push(format!("{name}: err {:.2e} in {} iters", err, rep.iterations));
    }
    println!("AC08 PDE manufactured solutions: PASS ({})", lines.join("; "));
}

/// Criterion 9: embeddedness probes. Sphere and single-wrap equidistant
/// meshes have zero transversal pairs at resolutions 32/64/128; the double
/// wrap reports coincident sheets; the limacon cylinder reports transversal
/// pairs; horosphere and equidistant boundary clusters count 1 and 2 (the
/// latter antipodal to 1e-3).
#[test]
fn ac09_embeddedness_probes() {
    for res in [32usize, 64, 128] {
        let sphere = catalog::geodesic_sphere(1.0);
        let mesh = mesh::sample_mesh(&sphere.chart, res, 0.0).unwrap();
        let rep = mesh::self_intersect(&mesh, TAU_COINC);
        assert!(rep.transversal.is_empty(), "sphere res {res}: {:?}", rep.transversal.len());
        let equi = catalog::equidistant(0.5, 1).unwrap();
        let mesh = mesh::sample_mesh(&equi.chart, res, 3.0).unwrap();
        let rep = mesh::self_intersect(&mesh, TAU_COINC);
        assert!(rep.transversal.is_empty(), "equidistant res {res}: {:?}", rep.transversal.len());
    }
    let wraps2 = catalog::equidistant(0.5, 2).unwrap();
    let mesh2 = mesh::sample_mesh(&wraps2.chart, 64, 3.0).unwrap();
    let rep2 = mesh::self_intersect(&mesh2, TAU_COINC);
    assert!(!rep2.coincident.is_empty(), "wraps=2 must report coincident sheets");
    assert!(rep2.transversal.is_empty(), "wraps=2 transversal {:?}", rep2.transversal.len());
    let lima = catalog::limacon_cylinder(0.015).unwrap();
    let mesh_l = mesh::sample_mesh(&lima.chart, 64, 3.0).unwrap();
    let rep_l = mesh::self_intersect(&mesh_l, TAU_COINC);
    assert!(!rep_l.transversal.is_empty(), "limacon must self-intersect");

    let horo = catalog::horosphere(0.0);
    let clusters = embed_probe::asymptotic_boundary(
        &horo.chart,
        horo.escape.as_ref(),
        EscapeSchedule::default(),
        THETA_SEP,
    )
    .unwrap();
    assert_eq!(clusters.len(), 1, "horosphere boundary clusters");
    let equi = catalog::equidistant(0.5, 1).unwrap();
    let clusters = embed_probe::asymptotic_boundary(
        &equi.chart,
        equi.escape.as_ref(),
        EscapeSchedule::default(),
        THETA_SEP,
    )
    .unwrap();
    assert_eq!(clusters.len(), 2, "equidistant boundary clusters");
    let dot: f64 = clusters[0]
        .representative
        .iter()
        .zip(&clusters[1].representative)
        .map(|(a, b)| a * b)
        .sum();
    assert!((dot + 1.0).abs() <= 1e-3, "equidistant clusters not antipodal: {dot}");
    println!(
        "AC09 embeddedness probes: PASS (sphere/equidistant clean at 32/64/128, wraps=2 coincident {}, limacon transversal {}, boundary clusters 1 and 2, antipodal defect {:.1e})",
        rep2.coincident.len(),
        rep_l.transversal.len(),
        (dot + 1.0).abs()
    );
}

/// Criterion 10: identical CLI configurations produce byte-identical
/// reports across repeated invocations.
#[test]
fn ac10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_horocurv");
    let configs: Vec<Vec<&str>> = vec![
        vec!["catalog"],
        vec!["classify", "--surface", "equidistant:d=0.5", "--grid", "16"],
        vec!["flow", "--surface", "equidistant:d=0.5", "--t", "1.0"],
        vec!["growth", "--metric", "model:m=0.5", "--rmax", "1000", "--nr", "128", "--ntheta", "16"],
        vec!["horo", "--surface", "geodesic_sphere:r=1", "--grid", "6"],
        vec!["probe", "--surface", "equidistant:d=0.5,wraps=2", "--resolution", "24", "--extent", "2"],
        vec!["pde", "--case", "model:m=0.5", "--size", "48", "--radius", "5"],
    ];
    for args in &configs {
        let run = |()| {
            let out = std::process::Command::new(bin)
                .args(args)
                .output()
                .expect("binary runs");
            (out.status.code(), out.stdout)
        };
        let (code_a, out_a) = run(());
        let (code_b, out_b) = run(());
        assert_eq!(code_a, Some(0), "{args:?} exit status");
        assert_eq!(code_a, code_b);
        assert!(!out_a.is_empty());
        assert_eq!(out_a, out_b, "{args:?} not byte-reproducible");
    }
    println!("AC10 CLI determinism: PASS ({} configurations byte-identical)", configs.len());
}
