#![allow(dead_code)]

use augkrylov::linalg::thin_qr;
use augkrylov::problems::NormalStream;
use augkrylov::DenseMatrix;
use nalgebra::{DMatrix, DVector};

pub fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut s = NormalStream::new(seed);
    (0..n).map(|_| s.next_normal()).collect()
}

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    DenseMatrix::from_col_major(rows, cols, random_vec(rows * cols, seed)).unwrap()
}

/// `Q₁ diag(σ) Q₂ᵀ` with `σ` log-spaced from 1 down to `1/cond`.
pub fn conditioned(n: usize, cond: f64, seed: u64) -> DenseMatrix {
    let (q1, _) = thin_qr(&gaussian(n, n, seed)).unwrap();
    let (q2, _) = thin_qr(&gaussian(n, n, seed ^ 0x9e37_79b9)).unwrap();
    let sigma: Vec<f64> = (0..n).map(|i| cond.powf(-(i as f64) / (n - 1) as f64)).collect();
    DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|p| q1[(i, p)] * sigma[p] * q2[(j, p)]).sum())
}

/// Eigenvalues `2e-4, 1e-3, 1e-2` and the rest spread over `[1, 2]`, with a
/// small nonsymmetric perturbation. Condition number below `1e4`; GMRES
/// converges well before `n` steps.
pub fn clustered(n: usize, seed: u64) -> DenseMatrix {
    let (q, _) = thin_qr(&gaussian(n, n, seed)).unwrap();
    let lam: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => 2e-4,
            1 => 1e-3,
            2 => 1e-2,
            _ => 1.0 + (i - 3) as f64 / (n - 3) as f64,
        })
        .collect();
    let g = gaussian(n, n, seed ^ 0x51);
    let eps = 1e-5 / (n as f64).sqrt();
    DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|p| q[(i, p)] * lam[p] * q[(j, p)]).sum::<f64>() + eps * g[(i, j)])
}

pub fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.as_col_major())
}

pub fn na_vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Least-squares minimizer through nalgebra's SVD.
pub fn na_lstsq(m: &DMatrix<f64>, rhs: &[f64]) -> Vec<f64> {
    let svd = m.clone().svd(true, true);
    svd.solve(&na_vec(rhs), 1e-14 * svd.singular_values.max()).unwrap().as_slice().to_vec()
}

pub fn na_cond(m: &DenseMatrix) -> f64 {
    let s = to_na(m).singular_values();
    s.max() / s.min()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn residual(a: &DenseMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = to_na(a) * na_vec(x);
    b.iter().zip(ax.iter()).map(|(bi, ai)| bi - ai).collect()
}

/// `‖[C, A V]ᵀ r‖ / (‖r‖ ‖[C, A V]‖_F)` for the columns of `w`.
pub fn constraint_ratio(w: &DMatrix<f64>, r: &[f64]) -> f64 {
    let wr = w.transpose() * na_vec(r);
    wr.norm() / (norm(r) * w.norm())
}
