//! Small dense linear algebra: the shape operators, metric matrices, and
//! block solves here never exceed a few hundred rows, so everything is
//! hand-rolled and deterministic.

use crate::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Max-norm of the asymmetry `A - A^T`.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut r = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        r
    }

    pub fn symmetrize(&self) -> Mat {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                s[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        s
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: Mat,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(a: &Mat) -> Result<Lu> {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut max = lu[(k, k)].abs();
            for i in (k + 1)..n {
                if lu[(i, k)].abs() > max {
                    max = lu[(i, k)].abs();
                    p = i;
                }
            }
            if max == 0.0 || !max.is_finite() {
                return Err(Error::SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                for j in (k + 1)..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        let n = self.lu.rows;
        let mut d = self.sign;
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    /// Solve with a matrix right-hand side (column by column).
    pub fn solve_mat(&self, b: &Mat) -> Mat {
        let mut out = Mat::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let col = self.solve(&b.col(j));
            for i in 0..b.rows {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

pub fn det(a: &Mat) -> Result<f64> {
    Ok(Lu::new(a)?.det())
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &Mat) -> Result<Mat> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite);
                }
                l[(i, j)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solve `L x = b` for lower-triangular `L`.
pub fn solve_lower(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = b.to_vec();
    for i in 0..n {
        for j in 0..i {
            x[i] -= l[(i, j)] * x[j];
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Solve `L^T x = b` for lower-triangular `L`.
pub fn solve_lower_t(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            x[i] -= l[(j, i)] * x[j];
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (ascending) and the matrix whose columns are the
/// corresponding orthonormal eigenvectors, with a deterministic sign and
/// tie-break convention.
pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.symmetrize();
    let mut v = Mat::identity(n);
    let scale = m.max_abs().max(1e-300);
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m[(i, j)].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> =
        (0..n).map(|j| (m[(j, j)], v.col(j))).collect();
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| cmp_lex(&a.1, &b.1))
    });
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Mat::zeros(n, n);
    for (j, (val, mut col)) in pairs.into_iter().enumerate() {
        // Deterministic sign: largest-magnitude component positive.
        let mut k_max = 0;
        for k in 1..n {
            if col[k].abs() > col[k_max].abs() {
                k_max = k;
            }
        }
        if col[k_max] < 0.0 {
            for x in col.iter_mut() {
                *x = -*x;
            }
        }
        vals.push(val);
        for i in 0..n {
            vecs[(i, j)] = col[i];
        }
    }
    (vals, vecs)
}

fn cmp_lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Generalized symmetric eigenproblem `A x = lambda B x` with `B` positive
/// definite. Returns ascending eigenvalues and B-orthonormal eigenvectors
/// (as columns).
pub fn sym_eigen_generalized(a: &Mat, b: &Mat) -> Result<(Vec<f64>, Mat)> {
    let n = a.rows;
    let l = cholesky(b)?;
    // C = L^{-1} A L^{-T}
    let mut c = Mat::zeros(n, n);
    for j in 0..n {
        let col = solve_lower(&l, &a.col(j));
        for i in 0..n {
            c[(i, j)] = col[i];
        }
    }
    let ct = c.transpose();
    let mut d = Mat::zeros(n, n);
    for j in 0..n {
        let col = solve_lower(&l, &ct.col(j));
        for i in 0..n {
            d[(i, j)] = col[i];
        }
    }
    let (vals, u) = sym_eigen(&d.symmetrize());
    let mut vecs = Mat::zeros(n, n);
    for j in 0..n {
        let col = solve_lower_t(&l, &u.col(j));
        for i in 0..n {
            vecs[(i, j)] = col[i];
        }
    }
    Ok((vals, vecs))
}

/// Condition number estimate of a symmetric positive matrix from its
/// eigenvalue range.
pub fn sym_condition(a: &Mat) -> f64 {
    let (vals, _) = sym_eigen(a);
    let max = vals.last().copied().unwrap_or(0.0).abs();
    let min = vals.first().copied().unwrap_or(0.0).abs();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Euclidean generalized cross product: given `m-1` row vectors in `R^m`,
/// returns the vector `c` with `c . r_i = 0` and `det([rows; c]) = |c|^2 >= 0`.
pub fn generalized_cross(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = rows.len() + 1;
    for r in rows {
        if r.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: r.len() });
        }
    }
    let mut c = vec![0.0; m];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut minor = Mat::zeros(m - 1, m - 1);
        for (i, r) in rows.iter().enumerate() {
            for (jj, v) in r.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| v).enumerate() {
                minor[(i, jj)] = *v;
            }
        }
        let d = match Lu::new(&minor) {
            Ok(lu) => lu.det(),
            Err(Error::SingularMatrix) => 0.0,
            Err(e) => return Err(e),
        };
        // Sign from cofactor expansion along the appended last row.
        let sign = if (m - 1 + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        *ck = sign * d;
    }
    Ok(c)
}

/// Block-tridiagonal solver with dense square blocks of uniform size.
/// Solves the system with diagonal blocks `d[i]`, sub-diagonal `a[i]`
/// (coupling row i to i-1) and super-diagonal `c[i]` (row i to i+1).
/// `rhs` holds one vector per block row. Overwrites nothing; returns the
/// solution as one vector per block row.
pub fn block_tridiagonal_solve(
    a: &[Option<Mat>],
    d: &[Mat],
    c: &[Option<Mat>],
    rhs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let nb = d.len();
    assert_eq!(a.len(), nb);
    assert_eq!(c.len(), nb);
    assert_eq!(rhs.len(), nb);
    let mut piv: Vec<Lu> = Vec::with_capacity(nb);
    let mut cp: Vec<Option<Mat>> = Vec::with_capacity(nb);
    let mut y: Vec<Vec<f64>> = Vec::with_capacity(nb);

    let mut d_cur = d[0].clone();
    let mut r_cur = rhs[0].clone();
    for i in 0..nb {
        let lu = Lu::new(&d_cur).map_err(|_| Error::SingularLinearization)?;
        let cprime = c[i].as_ref().map(|ci| lu.solve_mat(ci));
        let yi = lu.solve(&r_cur);
        piv.push(lu);
        y.push(yi);
        cp.push(cprime);
        if i + 1 < nb {
            let ai = a[i + 1].as_ref().expect("missing sub-diagonal block");
            d_cur = d[i + 1].clone();
            if let Some(cpi) = &cp[i] {
                let prod = ai.matmul(cpi);
                for k in 0..d_cur.data.len() {
                    d_cur.data[k] -= prod.data[k];
                }
            }
            r_cur = rhs[i + 1].clone();
            let ay = ai.matvec(&y[i]);
            for k in 0..r_cur.len() {
                r_cur[k] -= ay[k];
            }
        }
    }
    let mut x = y;
    for i in (0..nb - 1).rev() {
        if let Some(cpi) = &cp[i] {
            let corr = cpi.matvec(&x[i + 1]);
            for k in 0..x[i].len() {
                x[i][k] -= corr[k];
            }
        }
    }
    Ok(x)
}
