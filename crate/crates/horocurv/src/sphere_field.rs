//! Scalar fields on round-sphere patches and the differential operators the
//! horospherical module needs on them.
//!
//! Patches are colatitude/longitude grids `(a, b)` about a configurable axis
//! (pole-crossing surfaces get re-chartered by rotating the axis). The round
//! metric in these coordinates is `da^2 + sin^2 a db^2` with Christoffel
//! symbols `Gamma^a_bb = -sin a cos a` and `Gamma^b_ab = cot a`.

use std::sync::Arc;

use crate::{Error, Result};

type Scalar2 = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Orthonormal axis frame and grid layout of a sphere patch.
#[derive(Clone)]
pub struct SpherePatch {
    /// Colatitude is measured from this unit vector.
    pub axis: Vec<f64>,
    /// Completions of the axis to an orthonormal frame.
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub n_a: usize,
    pub n_b: usize,
}

impl SpherePatch {
    /// Patch about the first coordinate axis of `R^{n+1}` (dimension 3).
    pub fn about_x1(a_range: (f64, f64), b_range: (f64, f64), n_a: usize, n_b: usize) -> Self {
        SpherePatch {
            axis: vec![1.0, 0.0, 0.0],
            u1: vec![0.0, 1.0, 0.0],
            u2: vec![0.0, 0.0, 1.0],
            a_range,
            b_range,
            n_a,
            n_b,
        }
    }

    pub fn step_a(&self) -> f64 {
        (self.a_range.1 - self.a_range.0) / (self.n_a as f64 - 1.0)
    }

    pub fn step_b(&self) -> f64 {
        (self.b_range.1 - self.b_range.0) / (self.n_b as f64 - 1.0)
    }

    pub fn a(&self, i: usize) -> f64 {
        self.a_range.0 + i as f64 * self.step_a()
    }

    pub fn b(&self, j: usize) -> f64 {
        self.b_range.0 + j as f64 * self.step_b()
    }

    /// Ambient unit vector at `(a, b)`.
    pub fn point(&self, a: f64, b: f64) -> Vec<f64> {
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        (0..self.axis.len())
            .map(|k| ca * self.axis[k] + sa * (cb * self.u1[k] + sb * self.u2[k]))
            .collect()
    }
}

/// Analytic jet of a scalar field on the patch: value, first and second
/// coordinate derivatives.
#[derive(Clone)]
pub struct AnalyticJets {
    pub f: Arc<Scalar2>,
    pub fa: Arc<Scalar2>,
    pub fb: Arc<Scalar2>,
    pub faa: Arc<Scalar2>,
    pub fab: Arc<Scalar2>,
    pub fbb: Arc<Scalar2>,
}

impl AnalyticJets {
    /// Jets of a field depending on colatitude only.
    pub fn radial(
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        fa: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        faa: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Self {
        let f1 = f.clone();
        let fa1 = fa.clone();
        let faa1 = faa.clone();
        AnalyticJets {
            f: Arc::new(move |a, _| f1(a)),
            fa: Arc::new(move |a, _| fa1(a)),
            fb: Arc::new(|_, _| 0.0),
            faa: Arc::new(move |a, _| faa1(a)),
            fab: Arc::new(|_, _| 0.0),
            fbb: Arc::new(|_, _| 0.0),
        }
    }
}

/// Scalar field sampled on a sphere patch, optionally carrying analytic
/// jets. Without jets, derivatives come from second-order grid stencils and
/// are only available on the interior.
#[derive(Clone)]
pub struct SphereField {
    pub patch: SpherePatch,
    pub values: Vec<f64>,
    pub jets: Option<AnalyticJets>,
}

impl SphereField {
    pub fn from_fn(patch: SpherePatch, f: &Scalar2) -> Self {
        let mut values = Vec::with_capacity(patch.n_a * patch.n_b);
        for i in 0..patch.n_a {
            for j in 0..patch.n_b {
                values.push(f(patch.a(i), patch.b(j)));
            }
        }
        SphereField { patch, values, jets: None }
    }

    pub fn from_jets(patch: SpherePatch, jets: AnalyticJets) -> Self {
        let f = jets.f.clone();
        let mut field = SphereField::from_fn(patch, &*f);
        field.jets = Some(jets);
        field
    }

    /// Strip analytic jets, forcing grid stencils. Used to cross-check the
    /// stencil path against closed forms.
    pub fn without_jets(mut self) -> Self {
        self.jets = None;
        self
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.patch.n_b + j
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    /// First and second coordinate derivatives at grid node `(i, j)`.
    /// Grid mode requires one interior ring.
    pub fn derivs(&self, i: usize, j: usize) -> Result<FieldDerivs> {
        let a = self.patch.a(i);
        let b = self.patch.b(j);
        if let Some(jets) = &self.jets {
            return Ok(FieldDerivs {
                f: (jets.f)(a, b),
                fa: (jets.fa)(a, b),
                fb: (jets.fb)(a, b),
                faa: (jets.faa)(a, b),
                fab: (jets.fab)(a, b),
                fbb: (jets.fbb)(a, b),
            });
        }
        let (na, nb) = (self.patch.n_a, self.patch.n_b);
        if i == 0 || j == 0 || i + 1 >= na || j + 1 >= nb {
            return Err(Error::GridTooSmall { need: 3, got: 1 });
        }
        let ha = self.patch.step_a();
        let hb = self.patch.step_b();
        let v = |i: usize, j: usize| self.value(i, j);
        Ok(FieldDerivs {
            f: v(i, j),
            fa: (v(i + 1, j) - v(i - 1, j)) / (2.0 * ha),
            fb: (v(i, j + 1) - v(i, j - 1)) / (2.0 * hb),
            faa: (v(i + 1, j) - 2.0 * v(i, j) + v(i - 1, j)) / (ha * ha),
            fbb: (v(i, j + 1) - 2.0 * v(i, j) + v(i, j - 1)) / (hb * hb),
            fab: (v(i + 1, j + 1) - v(i + 1, j - 1) - v(i - 1, j + 1) + v(i - 1, j - 1))
                / (4.0 * ha * hb),
        })
    }

    /// Interior index ranges where grid stencils (with `margin` rings) are
    /// valid. Analytic fields have no margin requirement.
    pub fn interior(&self, margin: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        if self.jets.is_some() {
            (0..self.patch.n_a, 0..self.patch.n_b)
        } else {
            (margin..self.patch.n_a - margin, margin..self.patch.n_b - margin)
        }
    }
}

/// Value with first and second coordinate derivatives at a point.
#[derive(Debug, Clone, Copy)]
pub struct FieldDerivs {
    pub f: f64,
    pub fa: f64,
    pub fb: f64,
    pub faa: f64,
    pub fab: f64,
    pub fbb: f64,
}

impl FieldDerivs {
    /// Laplace-Beltrami of the round metric:
    /// `f_aa + cot a f_a + f_bb / sin^2 a`.
    pub fn laplacian(&self, a: f64) -> f64 {
        let sa = a.sin();
        self.faa + (a.cos() / sa) * self.fa + self.fbb / (sa * sa)
    }

    /// Covariant Hessian components on the round sphere.
    pub fn hessian(&self, a: f64) -> [f64; 3] {
        let (sa, ca) = a.sin_cos();
        let cot = ca / sa;
        let h_aa = self.faa;
        let h_ab = self.fab - cot * self.fb;
        let h_bb = self.fbb + sa * ca * self.fa;
        [h_aa, h_ab, h_bb]
    }

    /// Squared gradient norm `f_a^2 + f_b^2 / sin^2 a`.
    pub fn grad_norm2(&self, a: f64) -> f64 {
        let sa = a.sin();
        self.fa * self.fa + self.fb * self.fb / (sa * sa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_stencils_match_analytic_laplacian() {
        // f = cos a has Laplacian -2 cos a on the sphere.
        let patch = SpherePatch::about_x1((0.6, 2.5), (0.0, 1.5), 81, 81);
        let field = SphereField::from_fn(patch, &|a, _| a.cos());
        let (ra, rb) = field.interior(1);
        for i in ra.clone().step_by(10) {
            for j in rb.clone().step_by(10) {
                let a = field.patch.a(i);
                let d = field.derivs(i, j).unwrap();
                let lap = d.laplacian(a);
                assert!((lap + 2.0 * a.cos()).abs() < 1e-3, "lap = {lap} at a = {a}");
            }
        }
    }

    #[test]
    fn radial_jets_agree_with_stencils() {
        let patch = SpherePatch::about_x1((0.8, 2.4), (0.2, 1.2), 161, 161);
        let jets = AnalyticJets::radial(
            Arc::new(|a: f64| -(a.sin().ln())),
            Arc::new(|a: f64| -(a.cos() / a.sin())),
            Arc::new(|a: f64| 1.0 / (a.sin() * a.sin())),
        );
        let analytic = SphereField::from_jets(patch.clone(), jets);
        let gridded = analytic.clone().without_jets();
        let d_a = analytic.derivs(80, 80).unwrap();
        let d_g = gridded.derivs(80, 80).unwrap();
        assert!((d_a.fa - d_g.fa).abs() < 1e-5);
        assert!((d_a.faa - d_g.faa).abs() < 1e-4);
        // -log sin a solves Delta f = 1 exactly.
        let a = patch.a(80);
        assert!((d_a.laplacian(a) - 1.0).abs() < 1e-13);
    }
}
