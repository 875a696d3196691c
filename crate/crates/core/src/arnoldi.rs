//! Incremental Arnoldi process with modified Gram–Schmidt.
//!
//! After `j` steps the state holds an orthonormal basis `V_{j+1}` and the
//! `(j+1) × j` upper-Hessenberg matrix `H̲_j` with `A V_j = V_{j+1} H̲_j`.
//!
//! Besides the basis, the state tracks a target vector (normally the initial
//! residual `r₀`): its coefficients `V_{j+1}ᵀ r₀` and, when the start vector
//! differs from `r₀`, the part of `r₀` outside the basis. The coefficients are
//! the right-hand side of the small least-squares problem; the norm of the
//! remainder enters the residual estimate of range-restricted methods.

use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{axpy, dot, norm2, scale, DenseMatrix};
use crate::operator::LinearOperator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArnoldiConfig {
    /// Run a second Gram–Schmidt pass on every new vector.
    pub reorthogonalize: bool,
    /// Happy-breakdown threshold relative to the norm of the raw new vector.
    pub breakdown_tol: f64,
}

impl Default for ArnoldiConfig {
    fn default() -> Self {
        ArnoldiConfig { reorthogonalize: true, breakdown_tol: 1e-14 }
    }
}

/// Outcome of a single Arnoldi step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// A new basis vector was appended.
    Extended,
    /// The new direction lies in the current span; no vector was appended and
    /// the subdiagonal entry of the new column is exactly zero.
    Breakdown,
}

#[derive(Clone, Debug)]
pub struct ArnoldiState {
    basis: Vec<Vec<f64>>,
    // Column `i` (0-based) holds `h_{1,i+1} .. h_{i+2,i+1}`.
    hessenberg: Vec<Vec<f64>>,
    beta: f64,
    range_restricted: bool,
    target_coeffs: Vec<f64>,
    complement: Vec<f64>,
    complement_norm: f64,
    broken_down: bool,
    config: ArnoldiConfig,
    ops: u64,
}

impl ArnoldiState {
    /// Starts the process for the Krylov space generated by `r0`, or by `A r0`
    /// when `range_restricted` (one matvec).
    pub fn new<A: LinearOperator + ?Sized>(
        op: &A,
        r0: &[f64],
        range_restricted: bool,
        config: ArnoldiConfig,
    ) -> Result<Self, Error> {
        if r0.len() != op.dim() {
            return Err(Error::DimensionMismatch { expected: op.dim(), found: r0.len() });
        }
        if range_restricted {
            let w0 = op.apply_vec(r0);
            Self::with_start(&w0, r0, true, config)
        } else {
            Self::with_start(r0, r0, false, config)
        }
    }

    /// Starts the process from an arbitrary `start` vector while tracking the
    /// coefficients of `target`.
    ///
    /// With `track_complement == false` the caller asserts that `target` is
    /// parallel to `start`; its coefficient vector is then `‖target‖ e₁` and
    /// the complement is identically zero.
    pub fn with_start(
        start: &[f64],
        target: &[f64],
        track_complement: bool,
        config: ArnoldiConfig,
    ) -> Result<Self, Error> {
        if start.len() != target.len() {
            return Err(Error::DimensionMismatch { expected: target.len(), found: start.len() });
        }
        let n = start.len();
        let start_norm = norm2(start);
        if !(start_norm > f64::MIN_POSITIVE) || !start_norm.is_finite() {
            return Err(Error::ZeroStartVector);
        }
        let mut v1 = start.to_vec();
        scale(1.0 / start_norm, &mut v1);
        let beta = norm2(target);

        let (target_coeffs, complement, complement_norm) = if track_complement {
            let g1 = dot(&v1, target);
            let mut rem = target.to_vec();
            axpy(-g1, &v1, &mut rem);
            let norm = norm2(&rem);
            (alloc::vec![g1], rem, norm)
        } else {
            // `target` is a nonnegative multiple of `start` by contract.
            (alloc::vec![beta], Vec::new(), 0.0)
        };

        Ok(ArnoldiState {
            basis: alloc::vec![v1],
            hessenberg: Vec::new(),
            beta,
            range_restricted: track_complement,
            target_coeffs,
            complement,
            complement_norm,
            broken_down: false,
            config,
            ops: if track_complement { 3 * n as u64 } else { n as u64 },
        })
    }

    /// Performs one matvec `A v_j` and orthogonalizes it into the basis.
    pub fn step<A: LinearOperator + ?Sized>(&mut self, op: &A) -> Step {
        let w = op.apply_vec(self.basis.last().expect("basis is never empty"));
        self.extend(w)
    }

    /// Orthogonalizes a caller-supplied vector against the basis and appends it.
    ///
    /// This is the Arnoldi step without its matvec; projected and flexible
    /// variants prepare `w` themselves.
    pub fn extend(&mut self, mut w: Vec<f64>) -> Step {
        assert!(!self.broken_down, "Arnoldi process already broke down");
        let n = w.len() as u64;
        let j = self.basis.len();
        let raw_norm = norm2(&w);
        let mut h = alloc::vec![0.0; j + 1];
        let passes = if self.config.reorthogonalize { 2 } else { 1 };
        for _ in 0..passes {
            for (hi, v) in h.iter_mut().zip(&self.basis) {
                let coef = dot(v, &w);
                axpy(-coef, v, &mut w);
                *hi += coef;
            }
            self.ops += 2 * n * j as u64;
        }
        let next = norm2(&w);
        self.ops += n;

        if !(next > self.config.breakdown_tol * raw_norm) || next == 0.0 {
            h[j] = 0.0;
            self.hessenberg.push(h);
            self.target_coeffs.push(0.0);
            self.broken_down = true;
            return Step::Breakdown;
        }

        h[j] = next;
        scale(1.0 / next, &mut w);
        self.ops += n;
        let g = if self.range_restricted {
            let g = dot(&w, &self.complement);
            axpy(-g, &w, &mut self.complement);
            self.complement_norm = norm2(&self.complement);
            self.ops += 3 * n;
            g
        } else {
            0.0
        };
        self.target_coeffs.push(g);
        self.hessenberg.push(h);
        self.basis.push(w);
        Step::Extended
    }

    /// Number of completed steps `j`.
    pub fn steps(&self) -> usize {
        self.hessenberg.len()
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len()
    }

    pub fn broken_down(&self) -> bool {
        self.broken_down
    }

    pub fn range_restricted(&self) -> bool {
        self.range_restricted
    }

    /// `‖r₀‖` (the norm of the tracked vector).
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `‖(I − V_{j+1} V_{j+1}ᵀ) r₀‖`; zero in plain mode.
    pub fn complement_norm(&self) -> f64 {
        self.complement_norm
    }

    /// `V_{j+1}ᵀ r₀`, length `j + 1`.
    pub fn target_coeffs(&self) -> &[f64] {
        &self.target_coeffs
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn basis_vector(&self, i: usize) -> &[f64] {
        &self.basis[i]
    }

    /// Most recently appended basis vector.
    pub fn last_vector(&self) -> &[f64] {
        self.basis.last().expect("basis is never empty")
    }

    /// Column `i` (0-based) of `H̲`, length `i + 2`.
    pub fn column(&self, i: usize) -> &[f64] {
        &self.hessenberg[i]
    }

    pub fn last_column(&self) -> &[f64] {
        self.hessenberg.last().expect("no Arnoldi step taken yet")
    }

    /// Explicit `(j+1) × j` Hessenberg matrix.
    pub fn hessenberg(&self) -> DenseMatrix {
        let j = self.steps();
        let mut h = DenseMatrix::zeros(j + 1, j);
        for (c, col) in self.hessenberg.iter().enumerate() {
            h.col_mut(c)[..col.len()].copy_from_slice(col);
        }
        h
    }

    /// The first `cols` basis vectors as an `n × cols` matrix.
    pub fn basis_matrix(&self, cols: usize) -> DenseMatrix {
        DenseMatrix::from_columns(self.dim(), &self.basis[..cols]).expect("basis vectors share length")
    }

    /// `x += V_j y` for `y` of length at most the basis size.
    pub fn add_combination(&self, y: &[f64], x: &mut [f64]) {
        for (yi, v) in y.iter().zip(&self.basis) {
            axpy(*yi, v, x);
        }
    }

    /// Multiply–add operations spent in orthogonalization so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }
}
