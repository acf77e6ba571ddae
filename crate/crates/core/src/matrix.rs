//! Small dense complex matrices and a one-sided Jacobi SVD.
//!
//! Sizes here are tiny (antenna counts), so everything is stored row-major in
//! a flat `Vec` and the algorithms favour accuracy over speed.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum number of Jacobi sweeps before giving up.
pub const SVD_MAX_SWEEPS: usize = 100;
/// Relative off-diagonal threshold `|a_p^H a_q| <= tol * |a_p| |a_q|`.
pub const SVD_TOLERANCE: f64 = 1e-14;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(format!(
                "matrix must be nonempty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Build from a closure over `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be nonempty");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(values.len(), values.len(), |i, j| {
            Complex64::new(if i == j { values[i] } else { 0.0 }, 0.0)
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Entrywise difference; shapes must agree.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::InvalidShape(format!(
                "cannot subtract {}x{} from {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Sum of squared moduli of all entries.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Thin singular value decomposition `self = U diag(s) V^H`.
    ///
    /// `U` is `rows x r`, `V` is `cols x r` with `r = min(rows, cols)`, and the
    /// singular values come back in descending order. Columns belonging to
    /// zero singular values are completed to an orthonormal set.
    pub fn svd(&self) -> Result<SvdResult> {
        if self.rows >= self.cols {
            jacobi_svd_tall(self)
        } else {
            // A^H = U' S V'^H  =>  A = V' S U'^H
            let t = jacobi_svd_tall(&self.adjoint())?;
            Ok(SvdResult {
                u: t.v,
                singular_values: t.singular_values,
                v: t.u,
            })
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Free-function form of [`ComplexMatrix::matmul`].
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

pub fn frobenius_norm_sq(m: &ComplexMatrix) -> f64 {
    m.frobenius_norm_sq()
}

pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    m.svd()
}

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left singular vectors, one per column.
    pub u: ComplexMatrix,
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// Right singular vectors, one per column.
    pub v: ComplexMatrix,
}

impl SvdResult {
    /// `U diag(s) V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let r = self.singular_values.len();
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for j in 0..r {
                let z = us.get(i, j) * self.singular_values[j];
                us.set(i, j, z);
            }
        }
        us.matmul(&self.v.adjoint())
            .expect("svd factors have consistent shapes")
    }

    /// Squared singular values, i.e. the eigen-gains of `M^H M`.
    pub fn gains(&self) -> Vec<f64> {
        self.singular_values.iter().map(|s| s * s).collect()
    }
}

fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Rotate columns `p`, `q` of a column-major buffer set.
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * phase;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// One-sided Jacobi on a matrix with `rows >= cols`.
fn jacobi_svd_tall(m: &ComplexMatrix) -> Result<SvdResult> {
    let (rows, n) = m.shape();
    debug_assert!(rows >= n);
    let mut a: Vec<Vec<Complex64>> = (0..n).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();

    let mut converged = n < 2;
    let mut residual = 0.0;
    for _ in 0..SVD_MAX_SWEEPS {
        if converged {
            break;
        }
        residual = 0.0_f64;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = norm_sq(&a[p]);
                let beta = norm_sq(&a[q]);
                let gamma = dot_h(&a[p], &a[q]);
                let g = gamma.norm();
                let scale = (alpha * beta).sqrt();
                if scale == 0.0 || g <= SVD_TOLERANCE * scale {
                    continue;
                }
                residual = residual.max(g / scale);
                rotated = true;
                // Make a_p^H a_q real by rotating the phase of column q.
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::SvdNotConverged {
            sweeps: SVD_MAX_SWEEPS,
            residual,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = a.iter().map(|col| norm_sq(col).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let max_sv = norms.iter().cloned().fold(0.0, f64::max);
    let zero_cut = max_sv * f64::EPSILON * (rows.max(n) as f64);

    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut singular_values = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        if s > zero_cut && s > 0.0 {
            u_cols.push(a[j].iter().map(|z| z / s).collect());
            singular_values.push(s);
        } else {
            u_cols.push(vec![Complex64::new(0.0, 0.0); rows]);
            singular_values.push(if s > 0.0 { s } else { 0.0 });
            missing.push(slot);
        }
    }
    complete_orthonormal(&mut u_cols, &missing);

    let u = ComplexMatrix::from_fn(rows, n, |i, j| u_cols[j][i]);
    let v = ComplexMatrix::from_fn(n, n, |i, j| v[order[j]][i]);
    Ok(SvdResult {
        u,
        singular_values,
        v,
    })
}

/// Fill the listed (zero) columns with unit vectors orthogonal to all others.
fn complete_orthonormal(cols: &mut [Vec<Complex64>], missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let dim = cols[0].len();
    for &slot in missing {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for e in 0..dim {
            let mut cand = vec![Complex64::new(0.0, 0.0); dim];
            cand[e] = Complex64::new(1.0, 0.0);
            // Two passes of Gram-Schmidt for stability.
            for _ in 0..2 {
                for (k, other) in cols.iter().enumerate() {
                    if k == slot || norm_sq(other) == 0.0 {
                        continue;
                    }
                    let proj = dot_h(other, &cand);
                    for (c, o) in cand.iter_mut().zip(other) {
                        *c -= proj * o;
                    }
                }
            }
            let nrm = norm_sq(&cand).sqrt();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, cand));
            }
        }
        let (nrm, cand) = best.expect("dimension is at least one");
        cols[slot] = cand.into_iter().map(|z| z / nrm).collect();
    }
}
