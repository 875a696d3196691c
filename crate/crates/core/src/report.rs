use alloc::vec::Vec;

use crate::arnoldi::ArnoldiConfig;
use crate::linalg::{norm2, sub};

/// Settings shared by all solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative residual tolerance: stop once `‖r_j‖ ≤ tol · ‖r₀‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Generate the Krylov space from `A r₀` instead of `r₀`.
    pub range_restricted: bool,
    pub arnoldi: ArnoldiConfig,
    /// Materialize every iterate and its true residual. Costs `O(n j)` extra
    /// work per iteration plus one uncounted matvec.
    pub diagnostics: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 100,
            range_restricted: false,
            arnoldi: ArnoldiConfig::default(),
            diagnostics: false,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_range_restriction(mut self, on: bool) -> Self {
        self.range_restricted = on;
        self
    }

    pub fn with_diagnostics(mut self, on: bool) -> Self {
        self.diagnostics = on;
        self
    }

    pub fn with_reorthogonalization(mut self, on: bool) -> Self {
        self.arnoldi.reorthogonalize = on;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The residual test passed.
    Converged,
    /// `max_iter` iterations ran without passing the residual test.
    MaxIterations,
    /// Arnoldi broke down; the final iterate is the minimizer over the exhausted space.
    Breakdown,
    /// `r₀ = 0`, nothing to do.
    ZeroResidual,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// The quantity the solver monitors (exact for GMRES and GCRO, an upper
    /// bound on the projected residual for the unprojected augmented method).
    pub residual_estimate: f64,
    pub true_residual: Option<f64>,
    pub relative_error: Option<f64>,
}

/// Multiply–add counts, split by phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    /// Work done once before the first iteration (excluding matvecs).
    pub setup: u64,
    /// Work inside the iteration loop (orthogonalization, rotations, augmentation bookkeeping).
    pub iteration: u64,
    /// Work spent forming iterates and explicit residuals.
    pub materialization: u64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub initial_residual_norm: f64,
    pub history: Vec<IterationRecord>,
    /// Per-iteration iterates, filled only in diagnostic mode (index `j - 1` holds `x_j`).
    pub iterates: Vec<Vec<f64>>,
    pub best_error_iteration: Option<usize>,
    /// Matrix-vector products performed by the solver itself (diagnostics excluded).
    pub matvec_count: usize,
    /// Explicit residual evaluations triggered by the convergence gate.
    pub residual_checks: usize,
    pub ops: OpCounts,
}

impl SolveReport {
    pub(crate) fn trivial(x0: &[f64], matvec_count: usize) -> Self {
        SolveReport {
            x: x0.to_vec(),
            iterations: 0,
            converged: true,
            stop_reason: StopReason::ZeroResidual,
            initial_residual_norm: 0.0,
            history: Vec::new(),
            iterates: Vec::new(),
            best_error_iteration: None,
            matvec_count,
            residual_checks: 0,
            ops: OpCounts::default(),
        }
    }

    /// Fills `relative_error` in the history from stored iterates and records
    /// the iteration with the smallest error.
    pub fn attach_reference(&mut self, x_true: &[f64]) {
        let denom = norm2(x_true);
        let denom = if denom > 0.0 { denom } else { 1.0 };
        let mut best: Option<(usize, f64)> = None;
        for (rec, x) in self.history.iter_mut().zip(&self.iterates) {
            let err = norm2(&sub(x, x_true)) / denom;
            rec.relative_error = Some(err);
            if best.is_none_or(|(_, b)| err < b) {
                best = Some((rec.iteration, err));
            }
        }
        self.best_error_iteration = best.map(|(it, _)| it);
    }

    pub fn final_relative_error(&self, x_true: &[f64]) -> f64 {
        let denom = norm2(x_true);
        norm2(&sub(&self.x, x_true)) / if denom > 0.0 { denom } else { 1.0 }
    }

    pub fn best_relative_error(&self) -> Option<f64> {
        let it = self.best_error_iteration?;
        self.history.iter().find(|r| r.iteration == it)?.relative_error
    }

    /// Iterate `x_j` from diagnostic mode.
    pub fn iterate(&self, j: usize) -> Option<&[f64]> {
        if j == 0 {
            return None;
        }
        self.iterates.get(j - 1).map(|v| v.as_slice())
    }

    pub fn residual_estimates(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.residual_estimate).collect()
    }
}
