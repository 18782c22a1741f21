//! Dense vectors and small dense matrices.
//!
//! Problem sizes are desk scale (d up to about a thousand), so everything is
//! a plain row-major `Vec<f64>` with an LU factorization and a cyclic Jacobi
//! eigen-solver for symmetric parts.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, Sub};

use crate::error::{Error, Result};
use crate::math::{abs, hypot, sqrt};

/// Condition number above which a linear solve logs a warning.
pub const CONDITION_WARNING: f64 = 1e12;

/// Tolerance on the smallest eigenvalue of a symmetric part when checking
/// positive semidefiniteness.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// A point of `R^d` with finite coordinates and `d >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Vector(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    /// # Panics
    /// If `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Vector(vec![0.0; dim])
    }

    /// Internal constructor for results of arithmetic on finite inputs.
    /// Callers that can overflow check with [`Vector::is_finite`].
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Vector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub(crate) fn ensure_finite(self, what: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found: self.dim() })
        }
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.norm_sq())
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        sqrt(self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    pub fn scale(&self, factor: f64) -> Vector {
        self.map(|c| c * factor)
    }

    /// `self + factor * other`
    pub fn axpy(&self, factor: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + factor * b).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&c| f(c)).collect())
    }

    pub fn zip_map(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &Vector) -> Vector {
        let mut coords = self.0.clone();
        coords.extend_from_slice(&other.0);
        Vector(coords)
    }

    /// Splits into the first `at` coordinates and the rest.
    pub fn split_at(&self, at: usize) -> (Vector, Vector) {
        let (a, b) = self.0.split_at(at);
        (Vector(a.to_vec()), Vector(b.to_vec()))
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a - b)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn scalar(n: usize, value: f64) -> Self {
        Self::from_diag(&vec![value; n])
    }

    /// Builds a matrix from rows; all rows must have the same length and
    /// all entries must be finite.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::InvalidArgument("matrix has no rows".into()));
        }
        let ncols = rows[0].as_ref().len();
        if ncols == 0 {
            return Err(Error::InvalidArgument("matrix has no columns".into()));
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::DimensionMismatch { expected: ncols, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Matrix { rows: nrows, cols: ncols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        debug_assert_eq!(self.cols, x.dim());
        Vector::from_raw(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `(M + Mᵀ) / 2`
    pub fn sym_part(&self) -> Matrix {
        debug_assert!(self.is_square());
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.set(i, j, 0.5 * (self.get(i, j) + self.get(j, i)));
            }
        }
        s
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// `I + factor * self`
    pub fn shifted_identity(&self, factor: f64) -> Matrix {
        let mut m = self.scaled(factor);
        for i in 0..self.rows {
            m.data[i * self.cols + i] += 1.0;
        }
        m
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j) == 0.0))
    }

    /// `Some(c)` when the matrix is exactly `c * I`.
    pub fn as_scalar(&self) -> Option<f64> {
        if !self.is_square() || !self.is_diagonal() {
            return None;
        }
        let c = self.get(0, 0);
        (0..self.rows).all(|i| self.get(i, i) == c).then_some(c)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(abs(*v)))
    }

    fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| abs(self.get(i, j))).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Block matrix `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<Matrix> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::InvalidArgument("block shapes are inconsistent".into()));
        }
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        let mut m = Matrix::zeros(rows, cols);
        for (block, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..block.rows {
                for j in 0..block.cols {
                    m.set(r0 + i, c0 + j, block.get(i, j));
                }
            }
        }
        Ok(m)
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(&self) -> Vec<f64> {
        let mut values = jacobi_eigenvalues(self.sym_part());
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn min_sym_eigenvalue(&self) -> f64 {
        self.sym_eigenvalues()[0]
    }

    pub fn max_sym_eigenvalue(&self) -> f64 {
        *self.sym_eigenvalues().last().expect("non-empty matrix")
    }

    /// Rejects matrices whose symmetric part has an eigenvalue below
    /// `-PSD_TOLERANCE`.
    pub fn check_monotone(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let min = self.min_sym_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
        }
        Ok(())
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::factor(self)
    }

    pub fn solve(&self, rhs: &Vector) -> Result<Vector> {
        let lu = self.lu()?;
        if log::log_enabled!(log::Level::Warn) {
            let cond = lu.condition_estimate(self);
            if cond > CONDITION_WARNING {
                log::warn!("ill-conditioned solve: condition number about {cond:e}");
            }
        }
        lu.solve(rhs)
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &Matrix) -> Result<Lu> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.rows, found: m.cols });
        }
        let n = m.rows;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let floor = 1e-14 * m.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, abs(lu[i * n + k])))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > floor) {
                return Err(Error::SingularSystem);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let diag = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / diag;
                lu[i * n + k] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= factor * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, rhs: &Vector) -> Result<Vector> {
        rhs.check_dim(self.n)?;
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * y[j]).sum();
            y[i] = (y[i] - s) / self.lu[i * n + i];
        }
        Vector::from_raw(y).ensure_finite("linear solve")
    }

    /// `‖A‖₁ ‖A⁻¹‖₁`, computed column by column.
    fn condition_estimate(&self, m: &Matrix) -> f64 {
        let n = self.n;
        let mut inv_norm: f64 = 0.0;
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            match self.solve(&Vector::from_raw(e)) {
                Ok(col) => inv_norm = inv_norm.max(col.iter().map(|v| abs(*v)).sum()),
                Err(_) => return f64::INFINITY,
            }
        }
        m.norm_one() * inv_norm
    }
}

/// Cyclic Jacobi rotations on a symmetric matrix.
fn jacobi_eigenvalues(mut a: Matrix) -> Vec<f64> {
    let n = a.rows;
    let scale = a.max_abs();
    if n == 1 || scale == 0.0 {
        return a.diagonal();
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j) * a.get(i, j))
            .sum();
        if sqrt(off) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (abs(theta) + hypot(theta, 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    a.diagonal()
}
