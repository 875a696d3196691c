//! One cycle of flexible-GMRES-based augmentation.
//!
//! The augmentation vectors `w_1 .. w_k` are treated as the output of
//! successive flexible preconditioners: after `m` ordinary Arnoldi steps the
//! process multiplies `A` onto `w_1, w_2, ...` instead of the latest basis
//! vector. With `Z = [v_1 .. v_m, w_1 .. w_k]` this yields the flexible
//! relation `A Z = V_{m+k+1} H̲`, and the residual is minimized over
//! `K_m(A, r₀) + range(W)`.

use alloc::vec::Vec;

use crate::arnoldi::{ArnoldiState, Step};
use crate::error::Error;
use crate::gmres::{initial_residual, true_residual_norm, validate, ProgressiveQr};
use crate::linalg::{axpy, norm2, DenseMatrix};
use crate::operator::{CountingOperator, LinearOperator};
use crate::report::{IterationRecord, OpCounts, SolveReport, SolverConfig, StopReason};

fn cycle_iterate(state: &ArnoldiState, qr: &ProgressiveQr, w: &DenseMatrix, m: usize, x0: &[f64]) -> Result<Vec<f64>, Error> {
    let y = qr.solve()?;
    let mut x = x0.to_vec();
    let split = y.len().min(m);
    state.add_combination(&y[..split], &mut x);
    for (c, yc) in y[split..].iter().enumerate() {
        axpy(*yc, w.col(c), &mut x);
    }
    Ok(x)
}

/// Runs `m + k` flexible Arnoldi steps (`A v_i` for `i ≤ m`, then `A w_{i−m}`)
/// and returns `x₀ + V_m y(1:m) + W y(m+1:m+k)`.
///
/// `config.tol`, `config.max_iter` and `config.range_restricted` are ignored;
/// the cycle length is fixed by `m` and `k`. The history holds the exact
/// least-squares residual after every step. A breakdown ends the cycle early
/// with the minimizer over the space built so far.
pub fn fgmres_augmented_cycle<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: &[f64],
    w: &DenseMatrix,
    m: usize,
    config: &SolverConfig,
) -> Result<SolveReport, Error> {
    validate(config)?;
    let n = op.dim();
    let k = w.cols();
    if m == 0 {
        return Err(Error::InvalidArgument("cycle length m must be at least 1"));
    }
    if w.rows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.rows() });
    }
    if m + k > n {
        return Err(Error::InvalidArgument("m + k exceeds the problem dimension"));
    }
    let counted = CountingOperator::new(op);
    let r0 = initial_residual(&counted, b, x0)?;
    let beta = norm2(&r0);
    if beta == 0.0 {
        return Ok(SolveReport::trivial(x0, counted.count()));
    }
    let mut state = ArnoldiState::new(&counted, &r0, false, config.arnoldi)?;
    let mut qr = ProgressiveQr::new(beta);
    let setup_ops = state.ops();
    let mut history = Vec::new();
    let mut iterates = Vec::new();
    let mut stop = StopReason::MaxIterations;

    for i in 1..=m + k {
        let z = if i <= m { state.basis_vector(i - 1).to_vec() } else { w.col(i - m - 1).to_vec() };
        let step = state.extend(counted.apply_vec(&z));
        qr.push_column(state.last_column(), 0.0);
        let mut record = IterationRecord { iteration: i, residual_estimate: qr.residual(), true_residual: None, relative_error: None };
        if config.diagnostics {
            let x = cycle_iterate(&state, &qr, w, m, x0)?;
            record.true_residual = Some(true_residual_norm(op, b, &x));
            iterates.push(x);
        }
        history.push(record);
        if step == Step::Breakdown {
            stop = StopReason::Breakdown;
            break;
        }
    }

    let steps = qr.len();
    let x = cycle_iterate(&state, &qr, w, m, x0)?;
    let residual = qr.residual();
    Ok(SolveReport {
        x,
        iterations: steps,
        converged: residual <= config.tol * beta,
        stop_reason: if stop == StopReason::MaxIterations && residual <= config.tol * beta { StopReason::Converged } else { stop },
        initial_residual_norm: beta,
        history,
        iterates,
        best_error_iteration: None,
        matvec_count: counted.count(),
        residual_checks: 0,
        ops: OpCounts {
            setup: setup_ops,
            iteration: state.ops() - setup_ops + qr.ops(),
            materialization: (n * steps) as u64,
        },
    })
}
