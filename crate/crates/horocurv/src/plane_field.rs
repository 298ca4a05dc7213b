//! Scalar and symmetric-tensor fields on Cartesian planar grids, used by the
//! flat-coordinate decomposition of the horospherical module and by the
//! flat-case support functions.

use std::sync::Arc;

use crate::{Error, Result};

type Scalar2 = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Uniform Cartesian grid on `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub n_x: usize,
    pub n_y: usize,
}

impl PlaneGrid {
    pub fn square(half_width: f64, n: usize) -> Self {
        PlaneGrid {
            x_range: (-half_width, half_width),
            y_range: (-half_width, half_width),
            n_x: n,
            n_y: n,
        }
    }

    pub fn hx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.n_x as f64 - 1.0)
    }

    pub fn hy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / (self.n_y as f64 - 1.0)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_range.0 + i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_range.0 + j as f64 * self.hy()
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_y + j
    }
}

/// Analytic jet closures for a planar scalar field.
#[derive(Clone)]
pub struct PlaneJets {
    pub f: Arc<Scalar2>,
    pub fx: Arc<Scalar2>,
    pub fy: Arc<Scalar2>,
    pub fxx: Arc<Scalar2>,
    pub fxy: Arc<Scalar2>,
    pub fyy: Arc<Scalar2>,
}

/// Scalar field on a planar grid, optionally with analytic jets.
#[derive(Clone)]
pub struct PlaneField {
    pub grid: PlaneGrid,
    pub values: Vec<f64>,
    pub jets: Option<PlaneJets>,
}

impl PlaneField {
    pub fn from_fn(grid: PlaneGrid, f: &Scalar2) -> Self {
        let mut values = Vec::with_capacity(grid.n_x * grid.n_y);
        for i in 0..grid.n_x {
            for j in 0..grid.n_y {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        PlaneField { grid, values, jets: None }
    }

    pub fn from_jets(grid: PlaneGrid, jets: PlaneJets) -> Self {
        let f = jets.f.clone();
        let mut field = PlaneField::from_fn(grid, &*f);
        field.jets = Some(jets);
        field
    }

    pub fn constant(grid: PlaneGrid, c: f64) -> Self {
        PlaneField::from_jets(
            grid,
            PlaneJets {
                f: Arc::new(move |_, _| c),
                fx: Arc::new(|_, _| 0.0),
                fy: Arc::new(|_, _| 0.0),
                fxx: Arc::new(|_, _| 0.0),
                fxy: Arc::new(|_, _| 0.0),
                fyy: Arc::new(|_, _| 0.0),
            },
        )
    }

    pub fn without_jets(mut self) -> Self {
        self.jets = None;
        self
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Jet at node `(i, j)`; grid mode needs one interior ring.
    pub fn derivs(&self, i: usize, j: usize) -> Result<PlaneDerivs> {
        let x = self.grid.x(i);
        let y = self.grid.y(j);
        if let Some(jets) = &self.jets {
            return Ok(PlaneDerivs {
                f: (jets.f)(x, y),
                fx: (jets.fx)(x, y),
                fy: (jets.fy)(x, y),
                fxx: (jets.fxx)(x, y),
                fxy: (jets.fxy)(x, y),
                fyy: (jets.fyy)(x, y),
            });
        }
        if i == 0 || j == 0 || i + 1 >= self.grid.n_x || j + 1 >= self.grid.n_y {
            return Err(Error::GridTooSmall { need: 3, got: 1 });
        }
        let hx = self.grid.hx();
        let hy = self.grid.hy();
        let v = |i: usize, j: usize| self.value(i, j);
        Ok(PlaneDerivs {
            f: v(i, j),
            fx: (v(i + 1, j) - v(i - 1, j)) / (2.0 * hx),
            fy: (v(i, j + 1) - v(i, j - 1)) / (2.0 * hy),
            fxx: (v(i + 1, j) - 2.0 * v(i, j) + v(i - 1, j)) / (hx * hx),
            fyy: (v(i, j + 1) - 2.0 * v(i, j) + v(i, j - 1)) / (hy * hy),
            fxy: (v(i + 1, j + 1) - v(i + 1, j - 1) - v(i - 1, j + 1) + v(i - 1, j - 1))
                / (4.0 * hx * hy),
        })
    }

    pub fn interior(&self, margin: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        if self.jets.is_some() {
            (0..self.grid.n_x, 0..self.grid.n_y)
        } else {
            if self.grid.n_x <= 2 * margin || self.grid.n_y <= 2 * margin {
                return (0..0, 0..0);
            }
            (margin..self.grid.n_x - margin, margin..self.grid.n_y - margin)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PlaneDerivs {
    pub f: f64,
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fxy: f64,
    pub fyy: f64,
}

/// Symmetric 2-tensor field on a planar grid, components `(t11, t12, t22)`.
#[derive(Clone)]
pub struct PlaneTensorField {
    pub grid: PlaneGrid,
    pub t11: Vec<f64>,
    pub t12: Vec<f64>,
    pub t22: Vec<f64>,
}

impl PlaneTensorField {
    pub fn zeros(grid: PlaneGrid) -> Self {
        let n = grid.n_x * grid.n_y;
        PlaneTensorField { grid, t11: vec![0.0; n], t12: vec![0.0; n], t22: vec![0.0; n] }
    }

    pub fn at(&self, i: usize, j: usize) -> [f64; 3] {
        let k = self.grid.idx(i, j);
        [self.t11[k], self.t12[k], self.t22[k]]
    }

    pub fn set(&mut self, i: usize, j: usize, t: [f64; 3]) {
        let k = self.grid.idx(i, j);
        self.t11[k] = t[0];
        self.t12[k] = t[1];
        self.t22[k] = t[2];
    }

    /// Flat trace `t11 + t22` at a node.
    pub fn trace(&self, i: usize, j: usize) -> f64 {
        let k = self.grid.idx(i, j);
        self.t11[k] + self.t22[k]
    }

    /// Flat divergence `(d_x t1j + d_y t2j)` by central differences;
    /// needs one interior ring.
    pub fn divergence(&self, i: usize, j: usize) -> Result<[f64; 2]> {
        if i == 0 || j == 0 || i + 1 >= self.grid.n_x || j + 1 >= self.grid.n_y {
            return Err(Error::GridTooSmall { need: 3, got: 1 });
        }
        let hx = self.grid.hx();
        let hy = self.grid.hy();
        let d1 = (self.t11[self.grid.idx(i + 1, j)] - self.t11[self.grid.idx(i - 1, j)])
            / (2.0 * hx)
            + (self.t12[self.grid.idx(i, j + 1)] - self.t12[self.grid.idx(i, j - 1)])
                / (2.0 * hy);
        let d2 = (self.t12[self.grid.idx(i + 1, j)] - self.t12[self.grid.idx(i - 1, j)])
            / (2.0 * hx)
            + (self.t22[self.grid.idx(i, j + 1)] - self.t22[self.grid.idx(i, j - 1)])
                / (2.0 * hy);
        Ok([d1, d2])
    }
}
