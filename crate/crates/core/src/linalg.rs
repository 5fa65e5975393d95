//! Dense real linear algebra: matrices, a one-sided Jacobi SVD, numerical
//! rank, rank-one factorization, SVD expansions and least-squares solves.
//!
//! Everything here works on small dense `f64` matrices. The SVD is the
//! Hestenes one-sided Jacobi method; tall inputs are first reduced with a
//! Householder QR so that the Jacobi sweeps only see a square factor.

use std::fmt;
use std::ops::{Add, Deref, DerefMut, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

/// Default relative tolerance for rank decisions, relative to `sigma_1`.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 80;

/// A dense column vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
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

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// A dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// The `n x n` matrix with a single one at `(row, col)` (0-based).
    pub fn unit(n: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(row, col)] = 1.0;
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. All rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// `x * y^T`.
    pub fn outer(x: &[f64], y: &[f64]) -> Self {
        Self::from_fn(x.len(), y.len(), |i, j| x[i] * y[j])
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    /// Largest absolute entrywise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn mat_vec(&self, x: &[f64]) -> Vector {
        assert_eq!(self.cols, x.len(), "shape mismatch");
        Vector((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `x^T * self`.
    pub fn vec_mat(&self, x: &[f64]) -> Vector {
        assert_eq!(self.rows, x.len(), "shape mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += xi * a;
                }
            }
        }
        Vector(out)
    }

    /// `x^T * self * y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(&self.vec_mat(x), y)
    }

    /// Row-major flattening.
    pub fn to_vec(&self) -> Vec<f64> {
        self.data.clone()
    }

    /// Stacks the rows of `blocks` (which must share a column count).
    pub fn vstack(blocks: &[Matrix]) -> Result<Matrix> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::DimensionMismatch("vstack column counts differ".into()));
        }
        let data = blocks.iter().flat_map(|b| b.data.iter().copied()).collect::<Vec<_>>();
        Ok(Matrix { rows: blocks.iter().map(|b| b.rows).sum(), cols, data })
    }

    /// Places `blocks` side by side (which must share a row count).
    pub fn hstack(blocks: &[Matrix]) -> Result<Matrix> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for i in 0..rows {
                m.data[i * cols + offset..i * cols + offset + b.cols].copy_from_slice(b.row(i));
            }
            offset += b.cols;
        }
        Ok(m)
    }

    /// The sub-block of `cols` columns starting at column `start`.
    pub fn column_block(&self, start: usize, cols: usize) -> Matrix {
        Matrix::from_fn(self.rows, cols, |i, j| self[(i, start + j)])
    }

    /// The sub-block of `rows` rows starting at row `start`.
    pub fn row_block(&self, start: usize, rows: usize) -> Matrix {
        Matrix::from_fn(rows, self.cols, |i, j| self[(start + i, j)])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    for (o, b) in orow.iter_mut().zip(rhs.row(k)) {
                        *o += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sum");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in difference");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Thin singular value decomposition `m = u * diag(sigma) * v^T`.
///
/// With `p = min(rows, cols)`, `u` is `rows x p`, `v` is `cols x p`, both
/// with orthonormal columns, and `sigma` is sorted in non-increasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vector,
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let us = Matrix::from_fn(self.u.rows, self.sigma.dim(), |i, k| self.u[(i, k)] * self.sigma[k]);
        &us * &self.v.transpose()
    }
}

/// Singular value decomposition of a non-zero matrix.
pub fn svd(m: &Matrix) -> Result<Svd> {
    if !m.is_finite() {
        return Err(Error::DimensionMismatch("matrix has non-finite entries".into()));
    }
    if m.rows == 0 || m.cols == 0 || m.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    if m.rows < m.cols {
        let t = svd_tall(&m.transpose());
        return Ok(Svd { u: t.v, sigma: t.sigma, v: t.u });
    }
    Ok(svd_tall(m))
}

/// SVD for `rows >= cols`.
fn svd_tall(m: &Matrix) -> Svd {
    if m.rows > m.cols {
        let (q, r) = householder_qr(m);
        let inner = jacobi_square_or_tall(&r);
        return Svd { u: &q * &inner.u, sigma: inner.sigma, v: inner.v };
    }
    jacobi_square_or_tall(m)
}

/// Thin Householder QR of a tall matrix: `m = q * r`, `q` is `rows x cols`
/// with orthonormal columns, `r` is `cols x cols` upper triangular.
fn householder_qr(m: &Matrix) -> (Matrix, Matrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for k in 0..cols {
        let mut v: Vec<f64> = (k..rows).map(|i| a[(i, k)]).collect();
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        for j in k..cols {
            let s: f64 = (k..rows).map(|i| v[i - k] * a[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..rows {
                a[(i, j)] -= s * v[i - k];
            }
        }
        let vn = vnorm2.sqrt();
        reflectors.push(v.into_iter().map(|x| x / vn).collect());
    }
    let r = Matrix::from_fn(cols, cols, |i, j| if i <= j { a[(i, j)] } else { 0.0 });
    // q = H_0 H_1 ... H_{cols-1} applied to the first `cols` columns of I.
    let mut q = Matrix::from_fn(rows, cols, |i, j| if i == j { 1.0 } else { 0.0 });
    for k in (0..cols).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        for j in 0..cols {
            let s: f64 = (k..rows).map(|i| v[i - k] * q[(i, j)]).sum::<f64>() * 2.0;
            for i in k..rows {
                q[(i, j)] -= s * v[i - k];
            }
        }
    }
    (q, r)
}

/// One-sided Jacobi on the columns of `m` (`rows >= cols`).
fn jacobi_square_or_tall(m: &Matrix) -> Svd {
    let (rows, cols) = (m.rows, m.cols);
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| m.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = w.iter().enumerate().map(|(j, c)| (dot(c, c).sqrt(), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut u_cols: Vec<Option<Vec<f64>>> = Vec::with_capacity(cols);
    let mut sigma = Vec::with_capacity(cols);
    let mut v_out = Matrix::zeros(cols, cols);
    for (k, &(s, j)) in order.iter().enumerate() {
        sigma.push(s);
        for i in 0..cols {
            v_out[(i, k)] = v[j][i];
        }
        u_cols.push(if s > 0.0 {
            Some(w[j].iter().map(|x| x / s).collect())
        } else {
            None
        });
    }
    let u_cols = complete_orthonormal(rows, u_cols);
    let u = Matrix::from_fn(rows, cols, |i, k| u_cols[k][i]);
    Svd { u, sigma: Vector(sigma), v: v_out }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Replaces missing columns with unit vectors orthogonal to everything else.
fn complete_orthonormal(dim: usize, cols: Vec<Option<Vec<f64>>>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = cols.iter().flatten().cloned().collect();
    let mut candidate = 0;
    cols.into_iter()
        .map(|c| match c {
            Some(c) => c,
            None => loop {
                let mut e = vec![0.0; dim];
                e[candidate % dim] = 1.0;
                candidate += 1;
                for _ in 0..2 {
                    for b in &basis {
                        let d = dot(&e, b);
                        for (x, y) in e.iter_mut().zip(b) {
                            *x -= d * y;
                        }
                    }
                }
                let n = dot(&e, &e).sqrt();
                if n > 1e-8 {
                    let e: Vec<f64> = e.into_iter().map(|x| x / n).collect();
                    basis.push(e.clone());
                    break e;
                }
            },
        })
        .collect()
}

/// Number of singular values strictly above `rel_tol * sigma_1`. The zero
/// matrix has rank 0.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> usize {
    match svd(m) {
        Ok(s) => rank_of(&s.sigma, rel_tol),
        Err(_) => 0,
    }
}

fn rank_of(sigma: &[f64], rel_tol: f64) -> usize {
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Factors a rank-one matrix as `x * y^T`.
pub fn rank1_factor(m: &Matrix) -> Result<(Vector, Vector)> {
    let s = match svd(m) {
        Ok(s) => s,
        Err(Error::ZeroMatrix) => return Err(Error::NotRankOne(0)),
        Err(e) => return Err(e),
    };
    let rank = rank_of(&s.sigma, DEFAULT_RANK_TOL);
    if rank != 1 {
        return Err(Error::NotRankOne(rank));
    }
    let root = s.sigma[0].sqrt();
    Ok((Vector(s.u.col(0)).scaled(root), Vector(s.v.col(0)).scaled(root)))
}

/// Writes `m` as `sum_k p_k * q_k^T` with exactly `terms` pairs, splitting
/// each singular value symmetrically: `p_k = sqrt(sigma_k) u_k` and
/// `q_k = sqrt(sigma_k) v_k`. Pairs past `min(rows, cols)` are zero.
pub fn svd_expansion(m: &Matrix, terms: usize) -> Result<Vec<(Vector, Vector)>> {
    let s = match svd(m) {
        Ok(s) => Some(s),
        Err(Error::ZeroMatrix) => None,
        Err(e) => return Err(e),
    };
    let rank = s.as_ref().map_or(0, |s| rank_of(&s.sigma, DEFAULT_RANK_TOL));
    if terms < rank {
        return Err(Error::InsufficientTerms { terms, rank });
    }
    let zero = || (Vector::zeros(m.rows), Vector::zeros(m.cols));
    Ok((0..terms)
        .map(|k| match &s {
            Some(s) if k < s.sigma.dim() => {
                let root = s.sigma[k].sqrt();
                (Vector(s.u.col(k)).scaled(root), Vector(s.v.col(k)).scaled(root))
            }
            _ => zero(),
        })
        .collect())
}

/// Moore-Penrose pseudo-inverse, discarding singular values at or below
/// `max(rows, cols) * eps * sigma_1`.
pub fn pseudo_inverse(m: &Matrix) -> Matrix {
    let s = match svd(m) {
        Ok(s) => s,
        Err(_) => return Matrix::zeros(m.cols, m.rows),
    };
    let cutoff = s.sigma[0] * f64::EPSILON * m.rows.max(m.cols) as f64;
    let k = s.sigma.dim();
    let vs = Matrix::from_fn(m.cols, k, |i, j| {
        if s.sigma[j] > cutoff {
            s.v[(i, j)] / s.sigma[j]
        } else {
            0.0
        }
    });
    &vs * &s.u.transpose()
}

/// Minimal-norm least-squares solution `x` of `a * x = b`.
pub fn least_squares(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "least squares with {} equations and {} right-hand rows",
            a.rows, b.rows
        )));
    }
    Ok(&pseudo_inverse(a) * b)
}

/// Coefficients `z` with `sum_k z_k * basis_rows[k]` as close as possible to
/// `target` (minimal norm when the rows are dependent).
///
/// Fails with [`Error::NotInSpan`] when the residual's max-norm exceeds
/// `rel_tol * (1 + |target|_inf)`.
pub fn solve_in_span(basis_rows: &[Vector], target: &[f64], rel_tol: f64) -> Result<Vector> {
    let dim = target.len();
    if let Some(bad) = basis_rows.iter().find(|r| r.dim() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "basis row of length {} against target of length {dim}",
            bad.dim()
        )));
    }
    let z = if basis_rows.is_empty() {
        Vector::zeros(0)
    } else {
        // Columns of `a` are the basis rows.
        let a = Matrix::from_fn(dim, basis_rows.len(), |i, k| basis_rows[k][i]);
        let b = Matrix::from_fn(dim, 1, |i, _| target[i]);
        Vector(least_squares(&a, &b)?.col(0))
    };
    let residual = span_residual(basis_rows, &z, target);
    if residual > rel_tol * (1.0 + max_abs(target)) {
        return Err(Error::NotInSpan { context: "solve_in_span".into(), residual });
    }
    Ok(z)
}

/// `|sum_k z_k * rows[k] - target|_inf`.
pub fn span_residual(rows: &[Vector], z: &[f64], target: &[f64]) -> f64 {
    let mut acc = target.iter().map(|t| -t).collect::<Vec<_>>();
    for (row, &c) in rows.iter().zip(z) {
        for (a, r) in acc.iter_mut().zip(row.iter()) {
            *a += c * r;
        }
    }
    max_abs(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn assert_orthonormal_cols(m: &Matrix, tol: f64) {
        let g = &m.transpose() * m;
        assert!(g.max_abs_diff(&Matrix::identity(m.cols())) < tol, "not orthonormal: {g:?}");
    }

    #[test]
    fn svd_small_examples() {
        let s = svd(&Matrix::identity(2)).unwrap();
        assert_eq!(s.sigma.to_vec(), vec![1.0, 1.0]);

        let s = svd(&Matrix::from_rows(&[[3.0, 0.0], [0.0, 0.0]]).unwrap()).unwrap();
        assert_eq!(s.sigma.to_vec(), vec![3.0, 0.0]);
        assert_orthonormal_cols(&s.u, 1e-12);

        let m = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let s = svd(&m).unwrap();
        assert!((s.sigma[0] - 2.0).abs() < 1e-12 && s.sigma[1].abs() < 1e-12);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn svd_rejects_zero() {
        assert_eq!(svd(&Matrix::zeros(2, 3)).unwrap_err(), Error::ZeroMatrix);
    }

    #[test]
    fn svd_random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let rows = rng.random_range(1..=8);
            let cols = rng.random_range(1..=8);
            let m = random_matrix(&mut rng, rows, cols);
            let s = svd(&m).unwrap();
            let tol = 1e-10 * s.sigma[0];
            assert!(s.reconstruct().max_abs_diff(&m) < tol);
            assert_orthonormal_cols(&s.u, 1e-10);
            assert_orthonormal_cols(&s.v, 1e-10);
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
            assert!(s.sigma.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn svd_of_rank_deficient_tall_matrix() {
        // rank 2, 7x4: u must still be completed to orthonormal columns
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 7, 2);
        let b = random_matrix(&mut rng, 2, 4);
        let m = &a * &b;
        let s = svd(&m).unwrap();
        assert_orthonormal_cols(&s.u, 1e-10);
        assert_orthonormal_cols(&s.v, 1e-10);
        assert!(s.reconstruct().max_abs_diff(&m) < 1e-10 * s.sigma[0]);
        assert_eq!(numerical_rank(&m, 1e-9), 2);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&Matrix::from_fn(3, 3, |_, _| 1.0), 1e-9), 1);
        assert_eq!(numerical_rank(&Matrix::zeros(3, 3), 1e-9), 0);
        let fig2 = Matrix::from_rows(&[
            [0., 0., 1., 0., 1., 2.],
            [0., 0., 1., 0., 1., 2.],
            [1., 1., 2., 1., 2., 3.],
            [0., 0., 1., 0., 1., 2.],
            [1., 1., 2., 1., 2., 3.],
            [2., 2., 3., 2., 3., 4.],
        ])
        .unwrap();
        assert_eq!(numerical_rank(&fig2, 1e-9), 2);
    }

    #[test]
    fn rank1_examples() {
        let m = Matrix::from_rows(&[[2.0, 4.0], [2.0, 4.0]]).unwrap();
        let (x, y) = rank1_factor(&m).unwrap();
        assert!((x[0] - x[1]).abs() < 1e-12);
        assert!(Matrix::outer(&x, &y).max_abs_diff(&m) < 1e-10 * m.max_abs());
        assert_eq!(rank1_factor(&Matrix::identity(2)).unwrap_err(), Error::NotRankOne(2));
        assert_eq!(rank1_factor(&Matrix::zeros(2, 2)).unwrap_err(), Error::NotRankOne(0));
    }

    fn expand(pairs: &[(Vector, Vector)], rows: usize, cols: usize) -> Matrix {
        pairs
            .iter()
            .fold(Matrix::zeros(rows, cols), |acc, (p, q)| &acc + &Matrix::outer(p, q))
    }

    #[test]
    fn expansion_examples() {
        let m = Matrix::from_rows(&[[2.0, 0.0], [0.0, 0.0]]).unwrap();
        let pairs = svd_expansion(&m, 2).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(expand(&pairs[..1], 2, 2).max_abs_diff(&m) < 1e-12);
        assert!(pairs[1].0.max_abs() == 0.0 && pairs[1].1.max_abs() == 0.0);

        let i2 = Matrix::identity(2);
        assert!(expand(&svd_expansion(&i2, 2).unwrap(), 2, 2).max_abs_diff(&i2) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 3, 3);
        let sigma1 = svd(&m).unwrap().sigma[0];
        assert!(expand(&svd_expansion(&m, 3).unwrap(), 3, 3).max_abs_diff(&m) < 1e-10 * sigma1);

        assert_eq!(
            svd_expansion(&i2, 1).unwrap_err(),
            Error::InsufficientTerms { terms: 1, rank: 2 }
        );
        assert_eq!(svd_expansion(&Matrix::zeros(2, 2), 2).unwrap().len(), 2);
    }

    #[test]
    fn span_examples() {
        let e = |v: &[f64]| Vector::from(v.to_vec());
        let z = solve_in_span(&[e(&[1., 0.]), e(&[0., 1.])], &[3., 4.], 1e-9).unwrap();
        assert!((z[0] - 3.0).abs() < 1e-12 && (z[1] - 4.0).abs() < 1e-12);
        let z = solve_in_span(&[e(&[1., 1.])], &[2., 2.], 1e-9).unwrap();
        assert!((z[0] - 2.0).abs() < 1e-12);
        assert!(matches!(
            solve_in_span(&[e(&[1., 0.])], &[0., 1.], 1e-9),
            Err(Error::NotInSpan { .. })
        ));
    }

    #[test]
    fn span_minimal_norm_when_dependent() {
        let e = |v: &[f64]| Vector::from(v.to_vec());
        let z = solve_in_span(&[e(&[1., 1.]), e(&[1., 1.])], &[2., 2.], 1e-9).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qr_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_matrix(&mut rng, 9, 4);
        let (q, r) = householder_qr(&m);
        assert_orthonormal_cols(&q, 1e-12);
        assert!((&q * &r).max_abs_diff(&m) < 1e-12);
    }
}
