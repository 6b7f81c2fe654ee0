//! Small dense linear algebra: vectors, row-major matrices, a cyclic Jacobi
//! eigensolver for symmetric matrices and Gaussian elimination.
//!
//! These routines are the reference path against which the structured
//! circulant solvers in [`crate::smoothing`] are checked, so they avoid any
//! shortcut that relies on circulant structure.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smoothing::CirculantSmoother;

/// Jacobi sweeps allowed before giving up.
const JACOBI_MAX_SWEEPS: usize = 30;
/// Relative gap below which two eigenvalues are treated as one tied block.
const TIE_TOL: f64 = 1e-9;
/// Entries at or below this magnitude are skipped when fixing the sign of an eigenvector.
const SIGN_TOL: f64 = 1e-10;

/// A dense real vector with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("vector must have at least one entry"));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("vector entry {i} is not finite")));
        }
        Ok(Vector(entries))
    }

    /// Wraps entries without validation. Callers guarantee finiteness.
    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    /// Standard basis vector `e_i` of length `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Vector(v)
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

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn scaled(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|v| a * v).collect())
    }

    /// `self − other`.
    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Returns the vector scaled to unit Euclidean norm; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scaled(1.0 / n))
    }

    /// Flips the sign so that the first entry with magnitude above 1e-10 is positive.
    pub fn sign_normalized(mut self) -> Vector {
        if let Some(first) = self.0.iter().find(|v| v.abs() > SIGN_TOL) {
            if *first < 0.0 {
                self.0.iter_mut().for_each(|v| *v = -*v);
            }
        }
        self
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::domain("ragged matrix rows"));
        }
        DenseMatrix::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, *d);
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors (all of equal length).
    pub fn from_columns(columns: &[Vector]) -> Self {
        let rows = columns.first().map_or(0, |c| c.dim());
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        m
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Symmetric within `rel_tol · ‖m‖_F` entrywise.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = rel_tol * self.frobenius_norm().max(f64::MIN_POSITIVE);
        (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= scale))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.cols {
            return Err(Error::domain(format!(
                "dimension mismatch: matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok(Vector(
            (0..self.rows).map(|i| dot(self.row(i), x)).collect(),
        ))
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::domain("dimension mismatch in matrix product"));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| a * v).collect(),
        }
    }
}

/// Eigenvalue with a unit-norm, sign-normalized eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vector,
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below `tol · ‖m‖_F`,
/// with a budget of 30 sweeps. Pairs come back sorted by descending
/// eigenvalue. Eigenvectors of tied eigenvalues (relative gap below 1e-9) are
/// re-orthonormalized as a block; every vector is sign-normalized.
pub fn sym_eigendecompose(m: &DenseMatrix, tol: f64) -> Result<Vec<EigenPair>> {
    if !m.is_square() {
        return Err(Error::domain(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if !m.is_symmetric(1e-12) {
        return Err(Error::domain("matrix is not symmetric"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("eigensolver tolerance must be positive"));
    }
    let n = m.rows;
    let scale = m.frobenius_norm();
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);

    let off_norm = |a: &DenseMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a.get(i, j) * a.get(i, j);
                }
            }
        }
        s.sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off > tol * scale {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Convergence {
                sweeps,
                residual: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let tau = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|i| EigenPair {
            value: a.get(i, i),
            vector: v.column(i),
        })
        .collect();
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));

    // Re-orthonormalize tied blocks.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (pairs[end - 1].value - pairs[end].value).abs() < TIE_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            let block: Vec<Vector> = pairs[start..end].iter().map(|p| p.vector.clone()).collect();
            let ortho = orthonormalize(&block, 0.0);
            for (p, q) in pairs[start..end].iter_mut().zip(ortho) {
                p.vector = q;
            }
        }
        start = end;
    }

    for p in &mut pairs {
        p.vector = std::mem::replace(&mut p.vector, Vector::zeros(0)).sign_normalized();
    }
    Ok(pairs)
}

/// Applies the rotation in the (p, q) plane: `a ← Jᵀ a J`, `v ← v J`.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows;
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
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

/// Modified Gram–Schmidt. Vectors whose remaining norm is at or below `tol`
/// (relative to their original norm) are dropped as linearly dependent.
pub fn orthonormalize(vectors: &[Vector], tol: f64) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let original = v.norm();
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        // two passes keep orthogonality at working precision
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b.iter()).for_each(|(x, y)| *x -= c * y);
            }
        }
        let remaining = w.norm();
        if remaining > tol * original && remaining > 0.0 {
            basis.push(w.scaled(1.0 / remaining));
        }
    }
    basis
}

/// Eigenpairs of the non-symmetric matrix `A_σ⁻¹B` for symmetric `B`.
///
/// `A_σ⁻¹B` is similar to the symmetric `S = A_σ^{-1/2} B A_σ^{-1/2}`: if
/// `S u = λu` then `A_σ⁻¹B (A_σ^{-1/2}u) = λ (A_σ^{-1/2}u)`. The square root is
/// applied through the Fourier spectrum of `A_σ`, so everything stays real.
/// Returned vectors are renormalized to unit length and sign-normalized; pairs
/// are sorted by descending eigenvalue.
pub fn eig_similar_nonsymmetric(sigma: f64, b: &DenseMatrix) -> Result<Vec<EigenPair>> {
    if !b.is_square() || !b.is_symmetric(1e-12) {
        return Err(Error::domain("B must be square and symmetric"));
    }
    let n = b.rows;
    let smoother = CirculantSmoother::new(n, sigma)?;
    let inv_sqrt = smoother.inv_sqrt_dense();
    let s = inv_sqrt.matmul(b)?.matmul(&inv_sqrt)?;
    // A^{-1/2} B A^{-1/2} is symmetric in exact arithmetic; remove round-off asymmetry.
    let mut sym = s.clone();
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (s.get(i, j) + s.get(j, i));
            sym.set(i, j, avg);
            sym.set(j, i, avg);
        }
    }
    let pairs = sym_eigendecompose(&sym, 1e-14)?;
    pairs
        .into_iter()
        .map(|p| {
            let back = smoother.inv_sqrt_apply(&p.vector)?;
            let unit = back
                .normalized()
                .ok_or_else(|| Error::domain("zero eigenvector after back-transform"))?;
            Ok(EigenPair {
                value: p.value,
                vector: unit.sign_normalized(),
            })
        })
        .collect()
}

/// Solves `m x = y` by Gaussian elimination with partial pivoting.
pub fn dense_solve(m: &DenseMatrix, y: &[f64]) -> Result<Vector> {
    if !m.is_square() {
        return Err(Error::domain("dense_solve needs a square matrix"));
    }
    let n = m.rows;
    if y.len() != n {
        return Err(Error::domain(format!(
            "dimension mismatch: matrix is {n}x{n}, right-hand side has {} entries",
            y.len()
        )));
    }
    let threshold = 1e-13 * m.frobenius_norm();
    let mut a = m.data.clone();
    let mut rhs = y.to_vec();
    for col in 0..n {
        let (pivot_row, magnitude) =
            (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if magnitude <= threshold {
            return Err(Error::Singular {
                pivot: col,
                magnitude,
            });
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= factor * a[col * n + j];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (rhs[i] - tail) / a[i * n + i];
    }
    Ok(Vector(x))
}
