//! Cross-module integration: every catalog entry's expected record must be
//! reproduced by the generic pipeline (jet -> principal -> classify ->
//! light_cone -> probes); the catalog never bypasses it.

use horocurv::catalog::{self, CatalogEntry};
use horocurv::embed_probe::{self, EscapeSchedule};
use horocurv::horospherical;
use horocurv::mesh;
use horocurv::surface;
use horocurv::tol::{TAU_COINC, THETA_SEP};

fn convex_entries() -> Vec<CatalogEntry> {
    vec![
        catalog::horosphere(0.0),
        catalog::horosphere(0.6),
        catalog::equidistant(0.5, 1).unwrap(),
        catalog::equidistant(1.2, 1).unwrap(),
        catalog::geodesic_sphere(1.0),
        catalog::geodesic_sphere(0.4),
    ]
}

#[test]
fn expected_kappa_and_flags_reproduced() {
    for entry in convex_entries() {
        let jet = surface::jet(&entry.chart, &entry.sample_point).unwrap();
        let principal = surface::principal(&jet).unwrap();
        let mut want = entry.expected.kappa.clone().unwrap();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in principal.curvatures.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{}: kappa {g} vs {w}", entry.name);
        }
        let flags = surface::classify_with_slack(&principal.curvatures, false, 1e-12);
        assert!(flags.weakly_horo_convex, "{}", entry.name);
        assert!(flags.nonneg_sectional, "{}", entry.name);
        if entry.expected.flat_horospherical {
            let prod = principal.curvatures[0] * principal.curvatures[1];
            assert!((prod - 1.0).abs() < 1e-8, "{}: product {prod}", entry.name);
        }
    }
}

#[test]
fn gauss_map_local_diffeomorphism_proxy() {
    // Weakly horospherically convex charts: g_h positive definite at every
    // sampled point (det dG never vanishes).
    for entry in convex_entries() {
        let base = entry.sample_point.clone();
        let shifted = vec![base[0] + 0.15, base[1] + 0.3];
        for p in [base, shifted] {
            let jet = surface::jet(&entry.chart, &p).unwrap();
            let data = horospherical::light_cone(&jet).unwrap();
            assert!(data.g_h_positive, "{} at {p:?}", entry.name);
        }
    }
}

#[test]
fn curvature_bound_for_nonnegatively_curved_entries() {
    // P-tensor eigenvalues stay strictly inside (-1/2, 1/2).
    for entry in convex_entries() {
        let jet = surface::jet(&entry.chart, &entry.sample_point).unwrap();
        let principal = surface::principal(&jet).unwrap();
        for k in &principal.curvatures {
            let lam = 0.5 - 1.0 / (1.0 + k);
            assert!(lam > -0.5 && lam < 0.5, "{}: eigenvalue {lam}", entry.name);
        }
    }
}

#[test]
fn gauss_equation_cross_check_on_catalog_fields() {
    // Trace of the support P tensor equals the sectional-curvature formula
    // within 1e-4 on every convex catalog support field.
    let cases = vec![
        (catalog::sphere_support_field(1.0, 49, 49), {
            let c = 1.0 / 1.0f64.tanh();
            (c * c - 1.0) / ((1.0 + c) * (1.0 + c))
        }),
        (catalog::equidistant_support_field(0.5, 49, 49), 0.0),
        (catalog::horosphere_support_field(0.0, 49, 49), 0.0),
    ];
    for (rho, want) in cases {
        let p = horospherical::p_tensor_from_support(&rho).unwrap();
        let (ra, rb) = p.interior();
        for i in ra.step_by(6) {
            for j in rb.clone().step_by(6) {
                let tr = p.trace[rho.idx(i, j)];
                assert!((tr - want).abs() < 1e-4, "trace {tr} vs {want}");
            }
        }
    }
}

#[test]
fn embeddedness_matches_catalog_expectations() {
    // Resolutions coprime to the limacon's 3-fold crossing symmetry: if
    // mesh vertices land exactly on the self-intersection line, every
    // crossing pair degenerates to vertex- or edge-touching and is excluded
    // as adjacency.
    for (entry, resolution, extent) in [
        (catalog::geodesic_sphere(1.0), 48, 0.0),
        (catalog::equidistant(0.5, 1).unwrap(), 48, 3.0),
        (catalog::horosphere(0.0), 48, 4.0),
        (catalog::limacon_cylinder(0.015).unwrap(), 50, 3.0),
    ] {
        let mesh = mesh::sample_mesh(&entry.chart, resolution, extent).unwrap();
        let rep = mesh::self_intersect(&mesh, TAU_COINC);
        match entry.expected.embedded {
            Some(true) => assert!(
                rep.transversal.is_empty(),
                "{}: unexpected transversal pairs",
                entry.name
            ),
            Some(false) => assert!(
                !rep.transversal.is_empty(),
                "{}: expected self-intersection",
                entry.name
            ),
            None => {}
        }
    }
}

#[test]
fn boundary_counts_match_catalog_expectations() {
    for entry in [
        catalog::horosphere(0.0),
        catalog::equidistant(0.5, 1).unwrap(),
        catalog::limacon_cylinder(0.015).unwrap(),
    ] {
        let clusters = embed_probe::asymptotic_boundary(
            &entry.chart,
            entry.escape.as_ref(),
            EscapeSchedule::default(),
            THETA_SEP,
        )
        .unwrap();
        assert_eq!(
            clusters.len(),
            entry.expected.boundary_points.unwrap(),
            "{}",
            entry.name
        );
    }
}

#[test]
fn double_wrap_is_noninjective_but_image_clean() {
    let entry = catalog::equidistant(0.5, 2).unwrap();
    let inj = embed_probe::gauss_injectivity_probe(&entry.chart, 256).unwrap();
    assert!(!inj.violations.is_empty());
    let mesh = mesh::sample_mesh(&entry.chart, 48, 2.0).unwrap();
    let rep = mesh::self_intersect(&mesh, TAU_COINC);
    assert!(rep.transversal.is_empty());
    assert!(!rep.coincident.is_empty());
}
