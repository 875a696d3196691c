//! Dense vector and matrix primitives.
//!
//! Matrices are stored column-major: entry `(i, j)` lives at `data[i + j * rows]`.
//! Krylov solvers touch whole columns far more often than rows, so this keeps
//! basis vectors and Hessenberg columns contiguous.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::Error;

/// Relative tolerance used by [`thin_qr`] to flag a numerically dependent column.
pub const RANK_TOL: f64 = 1e-12;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    // Scaled accumulation so that vectors with tiny or huge entries do not
    // under/overflow in the sum of squares.
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * libm::sqrt(sum)
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}

/// `x - y` as a new vector.
pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, Error> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from row-major storage.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self, Error> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self::from_fn(rows, cols, |i, j| data[i * cols + j]))
    }

    /// Builds a matrix whose columns are the given slices. All columns must share a length.
    pub fn from_columns<C: AsRef<[f64]>>(rows: usize, columns: &[C]) -> Result<Self, Error> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: c.len() });
            }
            data.extend_from_slice(c);
        }
        Ok(DenseMatrix { rows, cols: columns.len(), data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_col_major(&self) -> &[f64] {
        &self.data
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// Appends a column; `column.len()` must equal `rows`.
    pub fn push_col(&mut self, column: &[f64]) {
        assert_eq!(column.len(), self.rows, "column length must match row count");
        self.data.extend_from_slice(column);
        self.cols += 1;
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self * x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), y);
            }
        }
    }

    /// `selfᵀ * x`
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let col = self.matvec(other.col(j));
            out.col_mut(j).copy_from_slice(&col);
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: sub(&self.data, &other.data),
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

/// Plane rotation `[c s; -s c]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GivensPair {
    pub c: f64,
    pub s: f64,
}

impl GivensPair {
    pub const IDENTITY: GivensPair = GivensPair { c: 1.0, s: 0.0 };

    /// Applies the rotation to the pair `(x, y)`, returning `(c x + s y, -s x + c y)`.
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.c * x + self.s * y, -self.s * x + self.c * y)
    }
}

/// Computes the rotation that maps `(a, b)` to `(r, 0)` with `r >= 0`.
///
/// `(0, 0)` yields the identity rotation and `r = 0`.
pub fn givens_rotation(a: f64, b: f64) -> (GivensPair, f64) {
    if b == 0.0 {
        if a >= 0.0 {
            return (GivensPair::IDENTITY, a);
        }
        return (GivensPair { c: -1.0, s: 0.0 }, -a);
    }
    if a == 0.0 {
        let s = if b > 0.0 { 1.0 } else { -1.0 };
        return (GivensPair { c: 0.0, s }, b.abs());
    }
    let r = libm::hypot(a, b);
    (GivensPair { c: a / r, s: b / r }, r)
}

/// Thin QR factorization via Householder reflections.
///
/// Returns `(Q, R)` with `Q` having orthonormal columns (`rows × cols`) and `R`
/// upper triangular with a positive diagonal. Fails with
/// [`Error::RankDeficient`] when a diagonal entry of `R` falls below
/// [`RANK_TOL`]` · ‖M‖_F`.
pub fn thin_qr(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix), Error> {
    thin_qr_with_tol(m, RANK_TOL)
}

pub fn thin_qr_with_tol(m: &DenseMatrix, rank_tol: f64) -> Result<(DenseMatrix, DenseMatrix), Error> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < cols {
        return Err(Error::DimensionMismatch { expected: cols, found: rows });
    }
    let norm = m.frobenius_norm();
    let mut work = m.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut r = DenseMatrix::zeros(cols, cols);

    for k in 0..cols {
        let x = &work.col(k)[k..];
        let alpha = norm2(x);
        let mut v = x.to_vec();
        // Reflect onto -sign(x0)·‖x‖ e1 to avoid cancellation.
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm = norm2(&v);
        if vnorm > 0.0 {
            scale(1.0 / vnorm, &mut v);
        }
        for j in k..cols {
            let col = &mut work.col_mut(j)[k..];
            let p = 2.0 * dot(&v, col);
            axpy(-p, &v, col);
        }
        reflectors.push(v);
    }

    let mut diag_sign = vec![1.0; cols];
    for k in 0..cols {
        let d = work[(k, k)];
        if !(d.abs() > rank_tol * norm) {
            return Err(Error::RankDeficient { column: k });
        }
        diag_sign[k] = if d < 0.0 { -1.0 } else { 1.0 };
    }
    for j in 0..cols {
        for i in 0..=j {
            r[(i, j)] = diag_sign[i] * work[(i, j)];
        }
    }

    // Q = H_0 H_1 ... H_{cols-1} [I; 0], then flip column signs to match R.
    let mut q = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        q[(j, j)] = 1.0;
    }
    for k in (0..cols).rev() {
        let v = &reflectors[k];
        for j in 0..cols {
            let col = &mut q.col_mut(j)[k..];
            let p = 2.0 * dot(v, col);
            axpy(-p, v, col);
        }
    }
    for j in 0..cols {
        if diag_sign[j] < 0.0 {
            scale(-1.0, q.col_mut(j));
        }
    }
    Ok((q, r))
}

/// Solves `R y = rhs` for upper-triangular `R`.
///
/// Uses the leading `rhs.len()` × `rhs.len()` block of `r`. A diagonal entry
/// that is zero, non-finite, or below `f64::MIN_POSITIVE` is reported as
/// [`Error::Singular`]; see [`back_substitute_with_tol`] for a relative test.
pub fn back_substitute(r: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>, Error> {
    back_substitute_with_tol(r, rhs, 0.0)
}

/// Like [`back_substitute`], additionally rejecting `|R_ii| <= rel_tol · max_i |R_ii|`.
pub fn back_substitute_with_tol(r: &DenseMatrix, rhs: &[f64], rel_tol: f64) -> Result<Vec<f64>, Error> {
    let n = rhs.len();
    if r.rows() < n || r.cols() < n {
        return Err(Error::DimensionMismatch { expected: n, found: r.rows().min(r.cols()) });
    }
    let dmax = (0..n).fold(0.0_f64, |m, i| m.max(r[(i, i)].abs()));
    let thresh = (rel_tol * dmax).max(f64::MIN_POSITIVE);
    let mut y = rhs.to_vec();
    for i in (0..n).rev() {
        let d = r[(i, i)];
        if !(d.abs() >= thresh) {
            return Err(Error::Singular { index: i });
        }
        let mut acc = y[i];
        for j in i + 1..n {
            acc -= r[(i, j)] * y[j];
        }
        y[i] = acc / d;
    }
    Ok(y)
}

/// Solves a square system by LU factorization with partial pivoting.
///
/// A pivot below `pivot_tol · max|a_ij|` is reported as singular.
pub fn lu_solve(a: &DenseMatrix, rhs: &[f64], pivot_tol: f64) -> Result<Vec<f64>, Error> {
    let n = a.rows();
    if a.cols() != n || rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rhs.len() });
    }
    let mut lu = a.clone();
    let mut x = rhs.to_vec();
    let amax = a.max_abs();
    for k in 0..n {
        let (p, pmax) = (k..n).fold((k, 0.0_f64), |(pi, pv), i| {
            let v = lu[(i, k)].abs();
            if v > pv {
                (i, v)
            } else {
                (pi, pv)
            }
        });
        if !(pmax > pivot_tol * amax) || pmax == 0.0 {
            return Err(Error::Singular { index: k });
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            x.swap(k, p);
        }
        let piv = lu[(k, k)];
        for i in k + 1..n {
            let l = lu[(i, k)] / piv;
            if l != 0.0 {
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= l * u;
                }
                x[i] -= l * x[k];
            }
        }
    }
    back_substitute(&lu, &x)
}

/// Minimizer of `‖M y − rhs‖` returned by [`dense_least_squares`].
#[derive(Clone, Debug)]
pub struct LeastSquares {
    /// Minimum-norm minimizer.
    pub solution: Vec<f64>,
    /// Numerical rank used for the solve.
    pub rank: usize,
    /// Singular values of `M` in decreasing order.
    pub singular_values: Vec<f64>,
}

impl LeastSquares {
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.singular_values.len()
    }
}

/// Relative singular-value cutoff used by [`dense_least_squares`].
pub const LS_RANK_TOL: f64 = 1e-15;

/// Least-squares solve through a singular value decomposition of `M`.
///
/// The SVD is computed with one-sided Jacobi rotations, which stays accurate
/// under column scaling. Singular values below
/// `LS_RANK_TOL · max(rows, cols) · σ_max` are treated as zero and the
/// minimum-norm solution is returned; the deficiency is visible through
/// [`LeastSquares::rank`].
pub fn dense_least_squares(m: &DenseMatrix, rhs: &[f64]) -> Result<LeastSquares, Error> {
    if m.rows() < m.cols() {
        return Err(Error::DimensionMismatch { expected: m.cols(), found: m.rows() });
    }
    if rhs.len() != m.rows() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: rhs.len() });
    }
    let svd = jacobi_svd(m);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let cutoff = LS_RANK_TOL * (m.rows().max(m.cols()) as f64) * smax;
    Ok(truncated_solve(svd, rhs, cutoff))
}

/// As [`dense_least_squares`], with singular values `≤ cutoff` treated as zero.
pub fn dense_least_squares_with_cutoff(m: &DenseMatrix, rhs: &[f64], cutoff: f64) -> Result<LeastSquares, Error> {
    if m.rows() < m.cols() {
        return Err(Error::DimensionMismatch { expected: m.cols(), found: m.rows() });
    }
    if rhs.len() != m.rows() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: rhs.len() });
    }
    Ok(truncated_solve(jacobi_svd(m), rhs, cutoff))
}

fn truncated_solve(svd: Svd, rhs: &[f64], cutoff: f64) -> LeastSquares {
    let cols = svd.v.cols();
    let mut solution = vec![0.0; cols];
    let mut rank = 0;
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        rank += 1;
        let coef = dot(svd.u.col(k), rhs) / s;
        axpy(coef, svd.v.col(k), &mut solution);
    }
    LeastSquares { solution, rank, singular_values: svd.sigma }
}

pub(crate) struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

/// One-sided Jacobi SVD of a tall matrix, singular values sorted decreasing.
pub(crate) fn jacobi_svd(m: &DenseMatrix) -> Svd {
    let cols = m.cols();
    let mut u = m.clone();
    let mut v = DenseMatrix::identity(cols);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(u.col(p), u.col(p));
                let beta = dot(u.col(q), u.col(q));
                let gamma = dot(u.col(p), u.col(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate_cols(&mut u, p, q, c, s);
                rotate_cols(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, f64)> = (0..cols).map(|j| (j, norm2(u.col(j)))).collect();
    order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal));
    let mut us = DenseMatrix::zeros(m.rows(), cols);
    let mut vs = DenseMatrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (k, &(j, s)) in order.iter().enumerate() {
        sigma.push(s);
        let uc = us.col_mut(k);
        uc.copy_from_slice(u.col(j));
        if s > 0.0 {
            scale(1.0 / s, uc);
        }
        vs.col_mut(k).copy_from_slice(v.col(j));
    }
    Svd { u: us, sigma, v: vs }
}

fn rotate_cols(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows();
    for i in 0..rows {
        let a = m[(i, p)];
        let b = m[(i, q)];
        m[(i, p)] = c * a - s * b;
        m[(i, q)] = s * a + c * b;
    }
}
