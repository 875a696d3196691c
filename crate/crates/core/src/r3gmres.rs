//! Unprojected augmented (range-restricted) GMRES.
//!
//! The correction is sought in `U + K_j(A, w₀)` with `w₀ ∈ {r₀, A r₀}`, minimizing
//! the full residual. The Krylov space is built from `A` alone; no basis of
//! `A(U + K_j)` is ever orthogonalized. Instead the coupled minimization splits
//! into
//!
//! * `(I − M_j M_jᵀ) R_j y_j = {Q_jᵀ V_{j+1}ᵀ (I − Φ) r₀}_{1:j}`, where
//!   `H̲_j = Q_j R̲_j` is the Givens QR of the Arnoldi Hessenberg matrix,
//!   `D_j = V_{j+1}ᵀ C` and `M_j = {Q_jᵀ D_j}_{1:j}`;
//! * `z_j = Cᵀ r₀ − D_jᵀ H̲_j y_j`,
//!
//! and `x_j = x₀ + Û F⁻¹ z_j + V_j y_j`. Per iteration this costs one extra
//! row `d_{j+1} = v_{j+1}ᵀ C` and one rotation of two rows of `M`.
//! [`R3State::coefficients`] reaches the same `(z_j, y_j)` through an
//! orthogonal `(n + 1) × k` least-squares solve; the split system above is
//! kept as [`solve_projected_small_system`].
//!
//! The residual is never formed until a cheap bound says convergence may have
//! happened: `‖(I − CCᵀ) r_j‖² ≤ |b̂_{j+1}|² + ‖(I − V_{j+1}V_{j+1}ᵀ) r₀‖²`, with
//! `b̂ = Q_jᵀ V_{j+1}ᵀ r₀`. The bound is scaled by `γ`, an estimate of the ratio
//! between the projected and the full residual norm.

use alloc::vec;
use alloc::vec::Vec;

use crate::arnoldi::{ArnoldiState, Step};
use crate::augment::AugmentationSpace;
use crate::error::Error;
use crate::gmres::{initial_residual, true_residual_norm, validate, ProgressiveQr};
use crate::linalg::{
    axpy, back_substitute, dense_least_squares, dense_least_squares_with_cutoff, dot, lu_solve, norm2, sub, DenseMatrix,
    GivensPair, LS_RANK_TOL,
};
use crate::operator::{CountingOperator, LinearOperator};
use crate::report::{IterationRecord, OpCounts, SolveReport, SolverConfig, StopReason};

/// Iterations skipped by the convergence gate after a false alarm.
pub const GATE_COOLDOWN: usize = 3;

/// Pivot threshold for `I − MᵀM` in [`solve_projected_small_system`].
pub const SMALL_SYSTEM_TOL: f64 = 1e-12;

/// Residual bound `sqrt(|b̂_{j+1}|² + complement²)`.
pub fn residual_estimate(qr: &ProgressiveQr, complement_norm: f64) -> f64 {
    libm::hypot(qr.residual(), complement_norm)
}

/// Rotates rows `j − 1` and `j` (0-based) of `M` by `rotation`.
pub fn update_m_rows(m_rows: &mut [Vec<f64>], rotation: GivensPair, j: usize) {
    let (head, tail) = m_rows.split_at_mut(j);
    let upper = &mut head[j - 1];
    let lower = &mut tail[0];
    for (a, b) in upper.iter_mut().zip(lower.iter_mut()) {
        let (x, y) = rotation.apply(*a, *b);
        *a = x;
        *b = y;
    }
}

/// Solves `(I − M Mᵀ) R y = rhs` for `j × j` upper-triangular `R` and `j × k` `M`.
///
/// `(I − M Mᵀ)⁻¹ = I + M (I − MᵀM)⁻¹ Mᵀ`, so only the `k × k` matrix
/// `I − MᵀM` is factored (LU, partial pivoting); `R` is handled by back
/// substitution. `I − MᵀM` has eigenvalues in `[0, 1]`; a pivot below
/// [`SMALL_SYSTEM_TOL`] means `M Mᵀ` has a unit eigenvalue.
///
/// These are the normal equations of `min_t ‖(I − CCᵀ)(X₁ t − r₀)‖` with
/// orthonormal `X₁`; [`R3State`] uses the equivalent orthogonal solve instead.
pub fn solve_projected_small_system(r: &DenseMatrix, m: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>, Error> {
    let j = rhs.len();
    if r.rows() != j || r.cols() != j || m.rows() != j {
        return Err(Error::DimensionMismatch { expected: j, found: r.rows() });
    }
    let k = m.cols();
    let mut u = rhs.to_vec();
    if k > 0 {
        let mut g = DenseMatrix::identity(k);
        for p in 0..k {
            for q in 0..k {
                g[(p, q)] -= dot(m.col(p), m.col(q));
            }
        }
        let mtr = m.tr_matvec(rhs);
        let w = lu_solve(&g, &mtr, SMALL_SYSTEM_TOL).map_err(|_| Error::SmallSystemSingular { iteration: j })?;
        axpy(1.0, &m.matvec(&w), &mut u);
    }
    back_substitute(r, &u)
}

/// Iteration state: Arnoldi basis, Givens QR of `H̲`, the rows `d_i = v_iᵀ C`
/// and their rotated copy `M`.
pub struct R3State<'s> {
    space: &'s AugmentationSpace,
    arnoldi: ArnoldiState,
    qr: ProgressiveQr,
    d_rows: Vec<Vec<f64>>,
    m_rows: Vec<Vec<f64>>,
    r0: Vec<f64>,
    c_r0: Vec<f64>,
    s1: Vec<f64>,
    gamma: f64,
    aug_ops: u64,
}

impl<'s> R3State<'s> {
    pub fn new<A: LinearOperator + ?Sized>(
        op: &A,
        r0: &[f64],
        space: &'s AugmentationSpace,
        config: &SolverConfig,
    ) -> Result<Self, Error> {
        let arnoldi = ArnoldiState::new(op, r0, config.range_restricted, config.arnoldi)?;
        let qr = ProgressiveQr::new(arnoldi.target_coeffs()[0]);
        let d1 = space.c_transpose(arnoldi.basis_vector(0));
        let c_r0 = space.c_transpose(r0);
        let s1 = space.expand(&c_r0)?;
        let beta = norm2(r0);
        let gamma = norm2(&space.apply_phi_complement(r0)) / beta;
        Ok(R3State {
            space,
            arnoldi,
            qr,
            m_rows: vec![d1.clone()],
            d_rows: vec![d1],
            r0: r0.to_vec(),
            c_r0,
            s1,
            gamma,
            aug_ops: 0,
        })
    }

    /// One iteration: matvec + Arnoldi, new row of `D`, QR update, rotation of `M`.
    pub fn step<A: LinearOperator + ?Sized>(&mut self, op: &A) -> Step {
        let step = self.arnoldi.step(op);
        let j = self.arnoldi.steps();
        let k = self.space.k();
        let d_next = match step {
            Step::Extended => {
                self.aug_ops += (self.space.n() * k) as u64;
                self.space.c_transpose(self.arnoldi.last_vector())
            }
            Step::Breakdown => vec![0.0; k],
        };
        self.m_rows.push(d_next.clone());
        self.d_rows.push(d_next);
        let rotation = self.qr.push_column(self.arnoldi.last_column(), self.arnoldi.target_coeffs()[j]);
        update_m_rows(&mut self.m_rows, rotation, j);
        self.aug_ops += 4 * k as u64;
        step
    }

    pub fn residual_estimate(&self) -> f64 {
        residual_estimate(&self.qr, self.arnoldi.complement_norm())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Replaces `γ` by `‖(I − CCᵀ) r‖ / ‖r‖` for an explicitly computed residual.
    pub fn update_gamma(&mut self, r: &[f64]) {
        let rn = norm2(r);
        if rn > 0.0 {
            self.gamma = norm2(&self.space.apply_phi_complement(r)) / rn;
        }
    }

    /// `M_j` (`j × k`), the first `j` rotated rows of `D_j`.
    pub fn m_matrix(&self) -> DenseMatrix {
        let j = self.qr.len();
        DenseMatrix::from_fn(j, self.space.k(), |i, c| self.m_rows[i][c])
    }

    /// `D_j = V_{j+1}ᵀ C` (`(j+1) × k`).
    pub fn d_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.d_rows.len(), self.space.k(), |i, c| self.d_rows[i][c])
    }

    /// All `j + 1` rows of the rotated `D`.
    pub fn m_rows(&self) -> &[Vec<f64>] {
        &self.m_rows
    }

    /// Right-hand side `{Q_jᵀ V_{j+1}ᵀ (I − Φ) r₀}_{1:j} = b̂(1:j) − M_j Cᵀ r₀`.
    pub fn projected_rhs(&self) -> Vec<f64> {
        let j = self.qr.len();
        let bhat = self.qr.rotated_rhs();
        (0..j).map(|i| bhat[i] - dot(&self.m_rows[i], &self.c_r0)).collect()
    }

    /// `(z_j, y_j)`.
    ///
    /// With `X = V_{j+1} Q_j`, `Ĉ = (I − V_{j+1}V_{j+1}ᵀ) C` and `r₀⊥ = (I − V_{j+1}V_{j+1}ᵀ) r₀`,
    /// the coupled residual in the basis `[X, ⊥]` is
    /// `[b̂(1:j) − t − M z; b̂_{j+1} − μᵀ z; r₀⊥ − Ĉ z]` with `t = R y` and `μ`
    /// the last rotated row of `D_j`. So `z` solves the `(n + 1) × k` problem
    /// `[μᵀ; Ĉ] z ≈ [b̂_{j+1}; r₀⊥]` and `R y = b̂(1:j) − M z`. In exact
    /// arithmetic this is the solution of [`solve_projected_small_system`] with
    /// `z = Cᵀ r₀ − D_jᵀ H̲_j y`, without squaring the conditioning. `Ĉ` and
    /// `r₀⊥` use two projection passes. Directions of `[μᵀ; Ĉ]` below roundoff
    /// (`C` inside `range(V_{j+1})`) get the minimum-norm `z`. Costs
    /// `O(n (j + 1)(k + 1) + n k²)`.
    pub fn coefficients(&self) -> Result<(Vec<f64>, Vec<f64>), Error> {
        let j = self.qr.len();
        let k = self.space.k();
        let n = self.space.n();
        let bhat = self.qr.rotated_rhs();
        let v = self.arnoldi.basis();
        let project = |x: &mut [f64], first: Option<&dyn Fn(usize) -> f64>| {
            for pass in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let coef = match (pass, first) {
                        (0, Some(f)) => f(i),
                        _ => dot(vi, x),
                    };
                    axpy(-coef, vi, x);
                }
            }
        };
        let z = if k == 0 {
            Vec::new()
        } else {
            let mu = &self.m_rows[j];
            let mut lhs = DenseMatrix::zeros(n + 1, k);
            for c in 0..k {
                let col = lhs.col_mut(c);
                col[0] = mu[c];
                col[1..].copy_from_slice(self.space.c().col(c));
                project(&mut col[1..], Some(&|i| self.d_rows[i][c]));
            }
            let mut rhs = vec![0.0; n + 1];
            rhs[0] = bhat[j];
            if self.arnoldi.complement_norm() > 0.0 {
                rhs[1..].copy_from_slice(&self.r0);
                project(&mut rhs[1..], None);
            }
            // Columns of C are unit vectors, so the cutoff is absolute.
            dense_least_squares_with_cutoff(&lhs, &rhs, LS_RANK_TOL * (n + 1) as f64)?.solution
        };
        let mut t = bhat[..j].to_vec();
        for (i, ti) in t.iter_mut().enumerate() {
            *ti -= dot(&self.m_rows[i], &z);
        }
        let y = back_substitute(&self.qr.r_matrix(), &t)?;
        Ok((z, y))
    }

    /// `(z_j, y_j)` from [`solve_projected_small_system`] and
    /// `z_j = Cᵀ r₀ − D_jᵀ H̲_j y_j`. Loses accuracy as `C` approaches
    /// `range(V_{j+1})`.
    pub fn normal_equation_coefficients(&self) -> Result<(Vec<f64>, Vec<f64>), Error> {
        let y = solve_projected_small_system(&self.qr.r_matrix(), &self.m_matrix(), &self.projected_rhs())?;
        let z = sub(&self.c_r0, &self.dt_h_y(&y));
        Ok((z, y))
    }

    // D_jᵀ H̲_j y
    fn dt_h_y(&self, y: &[f64]) -> Vec<f64> {
        let j = y.len();
        let mut hy = vec![0.0; j + 1];
        for (c, yc) in y.iter().enumerate() {
            axpy(*yc, self.arnoldi.column(c), &mut hy[..c + 2]);
        }
        let mut out = vec![0.0; self.space.k()];
        for (h, d) in hy.iter().zip(&self.d_rows) {
            axpy(*h, d, &mut out);
        }
        out
    }

    /// `x₀ + Û F⁻¹ z_j + V_j y_j`, i.e. `x₀ + s₁ + s₂ + V_j y_j` with
    /// `s₁ = Û F⁻¹ Cᵀ r₀` and `s₂ = −Û F⁻¹ D_jᵀ H̲_j y_j`.
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

    pub fn s1(&self) -> &[f64] {
        &self.s1
    }

    fn iteration_ops(&self) -> u64 {
        self.arnoldi.ops() + self.qr.ops() + self.aug_ops
    }
}

/// Unprojected augmented GMRES with residual-bound monitoring.
///
/// Every iteration compares `γ · estimate` against `tol · ‖r₀‖`. When the gate
/// opens, the iterate and its residual are formed; a false alarm rescales `γ`
/// and closes the gate for [`GATE_COOLDOWN`] iterations. At `max_iter` or on
/// Arnoldi breakdown the iterate is formed regardless.
pub fn r3gmres_solve<A: LinearOperator + ?Sized>(
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
    let n = op.dim() as u64;
    let k = space.k() as u64;
    let mut state = R3State::new(&counted, &r0, space, config)?;
    let initial_ops = state.iteration_ops();
    let threshold = config.tol * beta;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut iterates = Vec::new();
    let mut stop = StopReason::MaxIterations;
    let mut converged = false;
    let mut cooldown = 0usize;
    let mut checks = 0usize;
    let mut materialization = 0u64;
    let mut x_final = None;

    for j in 1..=config.max_iter {
        let step = state.step(&counted);
        let estimate = state.residual_estimate();
        let last = step == Step::Breakdown || j == config.max_iter;
        let gate = cooldown == 0 && state.gamma() * estimate < threshold;
        cooldown = cooldown.saturating_sub(1);

        let mut record = IterationRecord { iteration: j, residual_estimate: estimate, true_residual: None, relative_error: None };
        let mut x_j = None;
        if config.diagnostics {
            let x = state
                .iterate(x0)
                .map_err(|e| if let Error::SmallSystemSingular { .. } = e { Error::SmallSystemSingular { iteration: j } } else { e })?;
            record.true_residual = Some(true_residual_norm(op, b, &x));
            iterates.push(x.clone());
            x_j = Some(x);
        }
        history.push(record);

        if gate || last {
            let x = match x_j {
                Some(x) => x,
                None => state.iterate(x0).map_err(|e| match e {
                    Error::SmallSystemSingular { .. } => Error::SmallSystemSingular { iteration: j },
                    e => e,
                })?,
            };
            materialization += n * (j as u64 + k) + (j * j) as u64 + k * j as u64 + 4 * n * (j as u64 + 1) * (k + 1) + n * k * k;
            let r = sub(b, &counted.apply_vec(&x));
            checks += 1;
            let rn = norm2(&r);
            if rn < threshold {
                stop = StopReason::Converged;
                converged = true;
                x_final = Some(x);
                break;
            }
            if last {
                stop = if step == Step::Breakdown { StopReason::Breakdown } else { StopReason::MaxIterations };
                x_final = Some(x);
                break;
            }
            state.update_gamma(&r);
            materialization += 2 * n * k;
            cooldown = GATE_COOLDOWN;
        }
    }

    let iterations = state.qr.len();
    Ok(SolveReport {
        x: x_final.expect("loop always materializes on exit"),
        iterations,
        converged,
        stop_reason: stop,
        initial_residual_norm: beta,
        history,
        iterates,
        best_error_iteration: None,
        matvec_count: counted.count(),
        residual_checks: checks,
        ops: OpCounts { setup: initial_ops + n * k, iteration: state.iteration_ops() - initial_ops, materialization },
    })
}

/// Output of [`r3gmres_reference`].
#[derive(Clone, Debug)]
pub struct ReferenceReport {
    pub report: SolveReport,
    /// Iterations at which `[A Û, A V_j]` was numerically rank deficient (the
    /// minimum-norm minimizer was used there).
    pub rank_deficient_iterations: Vec<usize>,
}

/// Coupled-minimization oracle: at every iteration, minimizes
/// `‖r₀ − [A Û, A V_j] [z; y]‖` with a dense SVD least-squares solve over the
/// explicitly formed `n × (k + j)` matrix. Costs `O(n (k + j)²)` per iteration
/// and one extra matvec per basis vector. Iterates are always recorded.
pub fn r3gmres_reference<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: &[f64],
    space: &AugmentationSpace,
    config: &SolverConfig,
) -> Result<ReferenceReport, Error> {
    validate(config)?;
    let counted = CountingOperator::new(op);
    let r0 = initial_residual(&counted, b, x0)?;
    let beta = norm2(&r0);
    if beta == 0.0 {
        return Ok(ReferenceReport { report: SolveReport::trivial(x0, counted.count()), rank_deficient_iterations: Vec::new() });
    }
    let n = op.dim();
    let k = space.k();
    let u = space.u_raw();
    let mut w = DenseMatrix::zeros(n, 0);
    for c in 0..k {
        w.push_col(&counted.apply_vec(u.col(c)));
    }
    let mut arnoldi = ArnoldiState::new(&counted, &r0, config.range_restricted, config.arnoldi)?;
    let mut history = Vec::new();
    let mut iterates = Vec::new();
    let mut deficient = Vec::new();
    let mut stop = StopReason::MaxIterations;
    let mut x = x0.to_vec();

    for j in 1..=config.max_iter {
        let vj = arnoldi.basis_vector(j - 1).to_vec();
        let step = arnoldi.step(&counted);
        w.push_col(&counted.apply_vec(&vj));
        let ls = dense_least_squares(&w, &r0)?;
        if ls.is_rank_deficient() {
            deficient.push(j);
        }
        x = x0.to_vec();
        for c in 0..k {
            axpy(ls.solution[c], u.col(c), &mut x);
        }
        arnoldi.add_combination(&ls.solution[k..], &mut x);
        let rn = true_residual_norm(op, b, &x);
        history.push(IterationRecord { iteration: j, residual_estimate: rn, true_residual: Some(rn), relative_error: None });
        iterates.push(x.clone());
        if rn < config.tol * beta {
            stop = StopReason::Converged;
            break;
        }
        if step == Step::Breakdown {
            stop = StopReason::Breakdown;
            break;
        }
    }

    let iterations = history.len();
    Ok(ReferenceReport {
        report: SolveReport {
            x,
            iterations,
            converged: stop == StopReason::Converged,
            stop_reason: stop,
            initial_residual_norm: beta,
            history,
            iterates,
            best_error_iteration: None,
            matvec_count: counted.count(),
            residual_checks: iterations,
            ops: OpCounts::default(),
        },
        rank_deficient_iterations: deficient,
    })
}
