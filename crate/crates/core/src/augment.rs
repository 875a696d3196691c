//! Augmentation space `U` and the projectors it induces.
//!
//! `C F = A Û` is a thin QR factorization, so `C` has orthonormal columns and
//! `Φ = C Cᵀ` is the orthogonal projector onto `A·range(Û)`. The raw basis `Û`
//! is kept as supplied; a coefficient vector `z` with respect to the scaled
//! basis `U = Û F⁻¹` is expanded as `Û (F⁻¹ z)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{axpy, back_substitute, thin_qr, DenseMatrix};
use crate::operator::LinearOperator;

#[derive(Clone, Debug)]
pub struct AugmentationSpace {
    u_raw: DenseMatrix,
    c: DenseMatrix,
    f: DenseMatrix,
}

impl AugmentationSpace {
    /// The empty space (`k = 0`); every projector becomes trivial.
    pub fn empty(n: usize) -> Self {
        AugmentationSpace {
            u_raw: DenseMatrix::zeros(n, 0),
            c: DenseMatrix::zeros(n, 0),
            f: DenseMatrix::zeros(0, 0),
        }
    }

    /// Factors `A Û = C F` (`k` matvecs).
    ///
    /// Fails with [`Error::RankDeficient`] when `A Û` is numerically rank deficient.
    pub fn build<A: LinearOperator + ?Sized>(op: &A, u_raw: &DenseMatrix) -> Result<Self, Error> {
        let n = op.dim();
        if u_raw.rows() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u_raw.rows() });
        }
        if u_raw.cols() == 0 {
            return Ok(Self::empty(n));
        }
        if u_raw.cols() > n {
            return Err(Error::InvalidArgument("augmentation dimension exceeds problem size"));
        }
        let mut au = DenseMatrix::zeros(n, u_raw.cols());
        for j in 0..u_raw.cols() {
            op.apply(u_raw.col(j), au.col_mut(j));
        }
        let (c, f) = thin_qr(&au)?;
        Ok(AugmentationSpace { u_raw: u_raw.clone(), c, f })
    }

    pub fn k(&self) -> usize {
        self.c.cols()
    }

    pub fn n(&self) -> usize {
        self.c.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.k() == 0
    }

    /// Orthonormal basis `C` of `A·range(Û)`.
    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    /// Upper-triangular `F` with `A Û = C F`.
    pub fn f(&self) -> &DenseMatrix {
        &self.f
    }

    pub fn u_raw(&self) -> &DenseMatrix {
        &self.u_raw
    }

    /// `Cᵀ v`
    pub fn c_transpose(&self, v: &[f64]) -> Vec<f64> {
        self.c.tr_matvec(v)
    }

    /// `(I − C Cᵀ) v`
    pub fn apply_phi_complement(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for j in 0..self.k() {
            let cj = self.c.col(j);
            let coef = crate::linalg::dot(cj, &out);
            axpy(-coef, cj, &mut out);
        }
        out
    }

    /// `Û (F⁻¹ z)`, the correction in `U` with coefficients `z` relative to the scaled basis.
    pub fn expand(&self, z: &[f64]) -> Result<Vec<f64>, Error> {
        let mut out = vec![0.0; self.n()];
        if self.is_empty() {
            return Ok(out);
        }
        let w = back_substitute(&self.f, z)?;
        for (j, wj) in w.iter().enumerate() {
            axpy(*wj, self.u_raw.col(j), &mut out);
        }
        Ok(out)
    }

    /// `s₁ = Û (F⁻¹ (Cᵀ r₀))`, the action of the `AᵀA`-orthogonal projector onto
    /// `U` applied to the (unknown) initial error, computed from `r₀ = A η₀`.
    pub fn apply_pi_to_error(&self, r0: &[f64]) -> Result<Vec<f64>, Error> {
        self.expand(&self.c_transpose(r0))
    }
}
