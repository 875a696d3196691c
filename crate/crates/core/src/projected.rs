//! Augmented GMRES over the projected Krylov space `K_j((I−Φ)A, (I−Φ)w₀)`.
//!
//! Arnoldi runs on `v ↦ (I − C Cᵀ) A v`. The coefficients `B_j = Cᵀ A V_j`
//! removed by the projection are kept, giving the modified relation
//! `A [U V_j] = [C V_{j+1}] [[I, B_j], [0, H̲_j]]`. The coupled least-squares
//! problem then splits into a GMRES problem for `y_j` followed by
//! `z_j = Cᵀ r₀ − B_j y_j`.

use alloc::vec::Vec;

use crate::arnoldi::{ArnoldiState, Step};
use crate::augment::AugmentationSpace;
use crate::error::Error;
use crate::gmres::{initial_residual, true_residual_norm, validate, ProgressiveQr};
use crate::linalg::{axpy, norm2, DenseMatrix};
use crate::operator::{CountingOperator, LinearOperator};
use crate::report::{IterationRecord, OpCounts, SolveReport, SolverConfig, StopReason};

/// Iteration state of the projected augmented solver.
pub struct GcroState<'s> {
    space: &'s AugmentationSpace,
    arnoldi: ArnoldiState,
    qr: ProgressiveQr,
    // Column `i` holds `Cᵀ A v_{i+1}`.
    b_cols: Vec<Vec<f64>>,
    c_r0: Vec<f64>,
    reorthogonalize: bool,
    aug_ops: u64,
}

impl<'s> GcroState<'s> {
    /// Prepares the projected start vector. Returns `Ok(None)` when
    /// `(I − Φ) r₀ = 0`, i.e. the augmentation space alone solves the system.
    pub fn new<A: LinearOperator + ?Sized>(
        op: &A,
        r0: &[f64],
        space: &'s AugmentationSpace,
        config: &SolverConfig,
    ) -> Result<Option<Self>, Error> {
        let c_r0 = space.c_transpose(r0);
        let projected_r0 = space.apply_phi_complement(r0);
        if norm2(&projected_r0) <= f64::EPSILON * norm2(r0) {
            return Ok(None);
        }
        let arnoldi = if config.range_restricted {
            let w0 = space.apply_phi_complement(&op.apply_vec(r0));
            ArnoldiState::with_start(&w0, &projected_r0, true, config.arnoldi)?
        } else {
            ArnoldiState::with_start(&projected_r0, &projected_r0, false, config.arnoldi)?
        };
        let qr = ProgressiveQr::new(arnoldi.target_coeffs()[0]);
        Ok(Some(GcroState {
            space,
            arnoldi,
            qr,
            b_cols: Vec::new(),
            c_r0,
            reorthogonalize: config.arnoldi.reorthogonalize,
            aug_ops: 0,
        }))
    }

    /// One projected Arnoldi step: `w = A v_j`, `b = Cᵀ w`, `w ← w − C b`.
    pub fn step<A: LinearOperator + ?Sized>(&mut self, op: &A) -> Step {
        let mut w = op.apply_vec(self.arnoldi.last_vector());
        let k = self.space.k();
        let n = w.len() as u64;
        let mut b = alloc::vec![0.0; k];
        let passes = if self.reorthogonalize { 2 } else { 1 };
        for _ in 0..passes {
            let coef = self.space.c_transpose(&w);
            for (j, cj) in coef.iter().enumerate() {
                axpy(-cj, self.space.c().col(j), &mut w);
                b[j] += cj;
            }
            self.aug_ops += 2 * n * k as u64;
        }
        let step = self.arnoldi.extend(w);
        let j = self.arnoldi.steps();
        self.qr.push_column(self.arnoldi.last_column(), self.arnoldi.target_coeffs()[j]);
        self.b_cols.push(b);
        step
    }

    /// Exact residual norm of the current minimizer.
    pub fn residual_norm(&self) -> f64 {
        libm::hypot(self.qr.residual(), self.arnoldi.complement_norm())
    }

    /// `(z_j, y_j)` with `y_j` from the GMRES problem and `z_j = Cᵀ r₀ − B_j y_j`.
    pub fn coefficients(&self) -> Result<(Vec<f64>, Vec<f64>), Error> {
        let y = self.qr.solve()?;
        let mut z = self.c_r0.clone();
        for (bcol, yi) in self.b_cols.iter().zip(&y) {
            axpy(-yi, bcol, &mut z);
        }
        Ok((z, y))
    }

    /// `x₀ + Û F⁻¹ z_j + V_j y_j`
    pub fn iterate(&self, x0: &[f64]) -> Result<Vec<f64>, Error> {
        let (z, y) = self.coefficients()?;
        let mut x = self.space.expand(&z)?;
        axpy(1.0, x0, &mut x);
        self.arnoldi.add_combination(&y, &mut x);
        Ok(x)
    }

    pub fn arnoldi(&self) -> &ArnoldiState {
        &self.arnoldi
    }

    pub fn qr(&self) -> &ProgressiveQr {
        &self.qr
    }

    /// `B_j = Cᵀ A V_j` as a `k × j` matrix.
    pub fn b_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_columns(self.space.k(), &self.b_cols).expect("uniform column length")
    }

    pub fn c_r0(&self) -> &[f64] {
        &self.c_r0
    }

    fn iteration_ops(&self) -> u64 {
        self.arnoldi.ops() + self.qr.ops() + self.aug_ops
    }
}

/// GCRO-style augmented (optionally range-restricted) GMRES.
pub fn gcro_solve<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: &[f64],
    space: &AugmentationSpace,
    config: &SolverConfig,
) -> Result<SolveReport, Error> {
    validate(config)?;
    if space.n() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: space.n() });
    }
    let counted = CountingOperator::new(op);
    let r0 = initial_residual(&counted, b, x0)?;
    let beta = norm2(&r0);
    if beta == 0.0 {
        return Ok(SolveReport::trivial(x0, counted.count()));
    }
    let Some(mut state) = GcroState::new(&counted, &r0, space, config)? else {
        // r₀ ∈ range(C): the correction Û F⁻¹ Cᵀ r₀ is exact.
        let mut x = space.apply_pi_to_error(&r0)?;
        axpy(1.0, x0, &mut x);
        let mut rep = SolveReport::trivial(&x, counted.count());
        rep.stop_reason = StopReason::Converged;
        rep.initial_residual_norm = beta;
        return Ok(rep);
    };
    let setup_ops = state.iteration_ops();
    let mut history = Vec::new();
    let mut iterates = Vec::new();
    let mut stop = StopReason::MaxIterations;

    for j in 1..=config.max_iter {
        let step = state.step(&counted);
        let estimate = state.residual_norm();
        let mut record = IterationRecord { iteration: j, residual_estimate: estimate, true_residual: None, relative_error: None };
        if config.diagnostics {
            let x = state.iterate(x0)?;
            record.true_residual = Some(true_residual_norm(op, b, &x));
            iterates.push(x);
        }
        history.push(record);
        if estimate <= config.tol * beta {
            stop = StopReason::Converged;
            break;
        }
        if step == Step::Breakdown {
            stop = StopReason::Breakdown;
            break;
        }
    }

    let j = state.qr.len();
    let x = state.iterate(x0)?;
    let n = op.dim() as u64;
    let k = space.k() as u64;
    Ok(SolveReport {
        x,
        iterations: j,
        converged: stop == StopReason::Converged,
        stop_reason: stop,
        initial_residual_norm: beta,
        history,
        iterates,
        best_error_iteration: None,
        matvec_count: counted.count(),
        residual_checks: 0,
        ops: OpCounts {
            setup: setup_ops,
            iteration: state.iteration_ops() - setup_ops,
            materialization: n * (j as u64 + k) + k * j as u64,
        },
    })
}
