//! Classical and range-restricted GMRES.
//!
//! The Hessenberg least-squares problem is factored progressively with Givens
//! rotations, so the minimal residual norm is available every iteration
//! without forming the iterate.

use alloc::vec;
use alloc::vec::Vec;

use crate::arnoldi::{ArnoldiState, Step};
use crate::error::Error;
use crate::linalg::{back_substitute, givens_rotation, norm2, sub, DenseMatrix, GivensPair};
use crate::operator::{CountingOperator, LinearOperator};
use crate::report::{IterationRecord, OpCounts, SolveReport, SolverConfig, StopReason};

/// Givens-rotation QR of a growing Hessenberg matrix together with the rotated
/// right-hand side `b̂ = Qᵀ g`.
#[derive(Clone, Debug)]
pub struct ProgressiveQr {
    rotations: Vec<GivensPair>,
    // Column `i` of R, length `i + 1`.
    r_cols: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    ops: u64,
}

impl ProgressiveQr {
    /// Starts with the one-entry right-hand side `[g₁]`.
    pub fn new(g1: f64) -> Self {
        ProgressiveQr { rotations: Vec::new(), r_cols: Vec::new(), rhs: vec![g1], ops: 0 }
    }

    /// Number of columns processed.
    pub fn len(&self) -> usize {
        self.r_cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_cols.is_empty()
    }

    /// Adds Hessenberg column `j` (length `j + 1`, 1-based `j`), appending
    /// `next_rhs` as the new last entry of the right-hand side before rotating.
    /// Returns the new rotation.
    pub fn push_column(&mut self, column: &[f64], next_rhs: f64) -> GivensPair {
        let j = self.r_cols.len();
        assert_eq!(column.len(), j + 2, "Hessenberg column {} must have {} entries", j + 1, j + 2);
        let mut col = column.to_vec();
        for (i, g) in self.rotations.iter().enumerate() {
            let (a, b) = g.apply(col[i], col[i + 1]);
            col[i] = a;
            col[i + 1] = b;
        }
        let (g, r) = givens_rotation(col[j], col[j + 1]);
        col[j] = r;
        col.truncate(j + 1);
        self.rhs.push(next_rhs);
        let (a, b) = g.apply(self.rhs[j], self.rhs[j + 1]);
        self.rhs[j] = a;
        self.rhs[j + 1] = b;
        self.rotations.push(g);
        self.r_cols.push(col);
        self.ops += 4 * j as u64 + 8;
        g
    }

    /// `|b̂_{j+1}|`, the minimal residual of the small problem.
    pub fn residual(&self) -> f64 {
        self.rhs.last().copied().unwrap_or(0.0).abs()
    }

    /// `b̂`, length `j + 1`.
    pub fn rotated_rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn rotations(&self) -> &[GivensPair] {
        &self.rotations
    }

    pub fn last_rotation(&self) -> Option<GivensPair> {
        self.rotations.last().copied()
    }

    /// Square triangular factor `R_j`.
    pub fn r_matrix(&self) -> DenseMatrix {
        let j = self.len();
        let mut r = DenseMatrix::zeros(j, j);
        for (c, col) in self.r_cols.iter().enumerate() {
            r.col_mut(c)[..col.len()].copy_from_slice(col);
        }
        r
    }

    /// Applies `Qᵀ` (all stored rotations in order) to a vector of length `j + 1`.
    pub fn apply_qt(&self, v: &mut [f64]) {
        for (i, g) in self.rotations.iter().enumerate() {
            let (a, b) = g.apply(v[i], v[i + 1]);
            v[i] = a;
            v[i + 1] = b;
        }
    }

    /// Solves `R_j y = b̂(1:j)`.
    pub fn solve(&self) -> Result<Vec<f64>, Error> {
        let j = self.len();
        back_substitute(&self.r_matrix(), &self.rhs[..j])
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }
}

/// Computes `b − A x₀`, skipping the matvec when `x₀ = 0`.
pub(crate) fn initial_residual<A: LinearOperator + ?Sized>(op: &A, b: &[f64], x0: &[f64]) -> Result<Vec<f64>, Error> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x0.len() });
    }
    if x0.iter().all(|&v| v == 0.0) {
        Ok(b.to_vec())
    } else {
        Ok(sub(b, &op.apply_vec(x0)))
    }
}

pub(crate) fn true_residual_norm<A: LinearOperator + ?Sized>(op: &A, b: &[f64], x: &[f64]) -> f64 {
    norm2(&sub(b, &op.apply_vec(x)))
}

pub(crate) fn validate(config: &SolverConfig) -> Result<(), Error> {
    if config.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1"));
    }
    if !(config.tol >= 0.0) {
        return Err(Error::InvalidArgument("tol must be nonnegative"));
    }
    Ok(())
}

fn gmres_iterate(state: &ArnoldiState, qr: &ProgressiveQr, x0: &[f64]) -> Result<Vec<f64>, Error> {
    let y = qr.solve()?;
    let mut x = x0.to_vec();
    state.add_combination(&y, &mut x);
    Ok(x)
}

/// GMRES over `K_j(A, r₀)`, or `K_j(A, A r₀)` when range-restricted.
///
/// The monitored residual is `sqrt(|b̂_{j+1}|² + ‖(I − V_{j+1}V_{j+1}ᵀ) r₀‖²)`,
/// which equals the true residual norm in exact arithmetic for both variants.
/// The iterate is formed only on termination unless diagnostics are enabled.
pub fn gmres_solve<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolveReport, Error> {
    validate(config)?;
    let counted = CountingOperator::new(op);
    let r0 = initial_residual(&counted, b, x0)?;
    let beta = norm2(&r0);
    if beta == 0.0 {
        return Ok(SolveReport::trivial(x0, counted.count()));
    }
    let n = op.dim() as u64;
    let mut state = ArnoldiState::new(&counted, &r0, config.range_restricted, config.arnoldi)?;
    let mut qr = ProgressiveQr::new(state.target_coeffs()[0]);
    let setup_ops = state.ops();
    let mut history = Vec::new();
    let mut iterates = Vec::new();
    let mut materialization = 0u64;
    let mut stop = StopReason::MaxIterations;

    for j in 1..=config.max_iter {
        let step = state.step(&counted);
        qr.push_column(state.last_column(), state.target_coeffs()[j]);
        let estimate = libm::hypot(qr.residual(), state.complement_norm());
        let mut record = IterationRecord { iteration: j, residual_estimate: estimate, true_residual: None, relative_error: None };
        if config.diagnostics {
            let x = gmres_iterate(&state, &qr, x0)?;
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

    let j = qr.len();
    let x = gmres_iterate(&state, &qr, x0)?;
    materialization += (j * j) as u64 / 2 + n * j as u64;
    let converged = stop == StopReason::Converged
        || (stop == StopReason::Breakdown && history.last().is_some_and(|r| r.residual_estimate <= config.tol * beta));
    Ok(SolveReport {
        x,
        iterations: j,
        converged,
        stop_reason: stop,
        initial_residual_norm: beta,
        history,
        iterates,
        best_error_iteration: None,
        matvec_count: counted.count(),
        residual_checks: 0,
        ops: OpCounts { setup: setup_ops, iteration: state.ops() - setup_ops + qr.ops(), materialization },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_least_squares, thin_qr};
    use approx::assert_relative_eq;

    fn diag(d: &[f64]) -> DenseMatrix {
        DenseMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    fn rand_matrix(n: usize, seed: u64) -> DenseMatrix {
        let mut s = seed;
        DenseMatrix::from_fn(n, n, |i, j| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5 + if i == j { 3.0 } else { 0.0 }
        })
    }

    #[test]
    fn identity_converges_in_one_step() {
        let a = DenseMatrix::identity(4);
        let b = [1.0, -2.0, 0.5, 3.0];
        let rep = gmres_solve(&a, &b, &[0.0; 4], &SolverConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        for (x, y) in rep.x.iter().zip(&b) {
            assert_relative_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn diagonal_two_by_two() {
        let a = diag(&[2.0, 1.0]);
        let b = [1.0, 1.0];
        let cfg = SolverConfig::default().with_tol(1e-14).with_diagnostics(true);
        let rep = gmres_solve(&a, &b, &[0.0; 2], &cfg).unwrap();
        assert_eq!(rep.iterations, 2);
        assert_relative_eq!(rep.x[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(rep.x[1], 1.0, epsilon = 1e-14);
        for rec in &rep.history {
            assert!((rec.residual_estimate - rec.true_residual.unwrap()).abs() <= 1e-13);
        }
    }

    #[test]
    fn zero_rhs_returns_initial_guess() {
        let a = DenseMatrix::identity(3);
        let rep = gmres_solve(&a, &[0.0; 3], &[0.0; 3], &SolverConfig::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.stop_reason, StopReason::ZeroResidual);
        assert_eq!(rep.matvec_count, 0);
    }

    #[test]
    fn range_restricted_singular_system_monitors_complement() {
        // A = diag(1, 2, 0): b has a component in the null space direction e3.
        let a = diag(&[1.0, 2.0, 0.0]);
        let b = [1.0, 1.0, 0.5];
        let cfg = SolverConfig::default().with_tol(1e-14).with_range_restriction(true).with_diagnostics(true);
        let rep = gmres_solve(&a, &b, &[0.0; 3], &cfg).unwrap();
        for rec in &rep.history {
            let t = rec.true_residual.unwrap();
            assert!((rec.residual_estimate - t).abs() <= 1e-12, "{rec:?}");
            assert!(rec.residual_estimate >= 0.5 - 1e-12);
        }
        assert_eq!(rep.stop_reason, StopReason::Breakdown);
        assert_relative_eq!(rep.x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(rep.x[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn qr_first_column_swap() {
        let mut qr = ProgressiveQr::new(1.0);
        let g = qr.push_column(&[0.0, 1.0], 0.0);
        assert_eq!((g.c, g.s), (0.0, 1.0));
        assert_eq!(qr.r_matrix()[(0, 0)], 1.0);
    }

    #[test]
    fn qr_triangular_column_gives_identity_rotation() {
        let mut qr = ProgressiveQr::new(1.0);
        qr.push_column(&[2.0, 1.0], 0.0);
        let g = qr.push_column(&[0.5, 3.0, 0.0], 0.0);
        assert_eq!(g, GivensPair::IDENTITY);
    }

    #[test]
    fn progressive_qr_matches_batch_factorization() {
        let h = DenseMatrix::from_row_major(
            4,
            3,
            &[1.0, 0.3, -0.2, 0.7, 2.0, 0.4, 0.0, -0.5, 1.5, 0.0, 0.0, 0.8],
        )
        .unwrap();
        let mut qr = ProgressiveQr::new(1.0);
        for j in 0..3 {
            qr.push_column(&h.col(j)[..j + 2], 0.0);
        }
        let (_, r_batch) = thin_qr(&h).unwrap();
        let r = qr.r_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[(i, j)].abs() - r_batch[(i, j)].abs()).abs() <= 1e-13);
            }
        }
        // ‖β e₁ − H y‖ from the progressive factor matches a dense solve.
        let rhs = [1.0, 0.0, 0.0, 0.0];
        let ls = dense_least_squares(&h, &rhs).unwrap();
        let res = norm2(&sub(&h.matvec(&ls.solution), &rhs));
        assert_relative_eq!(qr.residual(), res, max_relative = 1e-13);
    }

    #[test]
    fn gmres_matches_dense_minimization_over_krylov_space() {
        let a = rand_matrix(12, 9);
        let b: Vec<f64> = (0..12).map(|i| (i as f64 + 1.0).ln()).collect();
        let cfg = SolverConfig::default().with_tol(0.0).with_max_iter(5);
        let rep = gmres_solve(&a, &b, &[0.0; 12], &cfg).unwrap();
        // Krylov basis by explicit powers, then minimize over A·K.
        let mut cols = vec![b.clone()];
        for i in 1..5 {
            cols.push(a.matvec(&cols[i - 1]));
        }
        let k = DenseMatrix::from_columns(12, &cols).unwrap();
        let ak = a.matmul(&k);
        let ls = dense_least_squares(&ak, &b).unwrap();
        let res = norm2(&sub(&ak.matvec(&ls.solution), &b));
        let rep_res = norm2(&sub(&b, &a.matvec(&rep.x)));
        assert_relative_eq!(rep_res, res, max_relative = 1e-10);
        assert_relative_eq!(rep.history[4].residual_estimate, rep_res, max_relative = 1e-10);
    }

    #[test]
    fn monitored_residual_is_nonincreasing() {
        let a = rand_matrix(15, 2);
        let b = vec![1.0; 15];
        for rr in [false, true] {
            let cfg = SolverConfig::default().with_tol(1e-12).with_range_restriction(rr);
            let rep = gmres_solve(&a, &b, &[0.0; 15], &cfg).unwrap();
            for w in rep.history.windows(2) {
                assert!(w[1].residual_estimate <= w[0].residual_estimate * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn nonzero_initial_guess_counts_residual_matvec() {
        let a = diag(&[3.0, 1.0, 2.0]);
        let rep = gmres_solve(&a, &[1.0, 1.0, 1.0], &[0.1, 0.0, 0.0], &SolverConfig::default().with_tol(1e-13)).unwrap();
        assert_eq!(rep.matvec_count, rep.iterations + 1);
        let rep = gmres_solve(&a, &[1.0, 1.0, 1.0], &[0.0; 3], &SolverConfig::default().with_tol(1e-13)).unwrap();
        assert_eq!(rep.matvec_count, rep.iterations);
    }
}
