mod common;

use augkrylov::{
    fgmres_augmented_cycle, gmres_solve, r3gmres_solve, ArnoldiConfig, ArnoldiState, AugmentationSpace, DenseMatrix,
    Error, SolverConfig, StopReason,
};
use common::*;
use nalgebra::DMatrix;

fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

#[test]
fn empty_w_is_one_gmres_cycle() {
    let n = 30;
    let a = conditioned(n, 1e3, 1);
    let b = random_vec(n, 2);
    let cfg = SolverConfig::default().with_tol(1e-30);
    let cycle = fgmres_augmented_cycle(&a, &b, &zeros(n), &DenseMatrix::zeros(n, 0), 10, &cfg).unwrap();
    let g = gmres_solve(&a, &b, &zeros(n), &cfg.with_max_iter(10)).unwrap();
    assert_eq!(cycle.iterations, 10);
    let (rc, rg) = (norm(&residual(&a, &b, &cycle.x)), norm(&residual(&a, &b, &g.x)));
    assert!((rc - rg).abs() <= 1e-12 * rg);
    assert!(diff_norm(&cycle.x, &g.x) <= 1e-10 * norm(&g.x));
}

#[test]
fn exact_direction_in_w_solves_the_system() {
    let n = 25;
    let a = clustered(n, 3);
    let x0 = random_vec(n, 4);
    let x_true = random_vec(n, 5);
    let b = a.matvec(&x_true);
    let e: Vec<f64> = x_true.iter().zip(&x0).map(|(x, y)| x - y).collect();
    let w = DenseMatrix::from_columns(n, &[random_vec(n, 6), e]).unwrap();
    let rep = fgmres_augmented_cycle(&a, &b, &x0, &w, 3, &SolverConfig::default().with_diagnostics(true)).unwrap();
    let r0 = norm(&residual(&a, &b, &x0));
    // The error direction enters with the last step.
    assert!(rep.history.last().unwrap().residual_estimate <= 1e-10 * r0);
    assert!(norm(&residual(&a, &b, &rep.x)) <= 1e-10 * r0);
}

#[test]
fn matches_plain_r3gmres_at_equal_dimension() {
    let n = 30;
    for seed in 0..4u64 {
        let a = conditioned(n, 1e3, 10 + seed);
        let b = random_vec(n, 20 + seed);
        let w = gaussian(n, 2, 30 + seed);
        let cfg = SolverConfig::default().with_tol(1e-30);
        let cycle = fgmres_augmented_cycle(&a, &b, &zeros(n), &w, 8, &cfg).unwrap();
        let space = AugmentationSpace::build(&a, &w).unwrap();
        let r3 = r3gmres_solve(&a, &b, &zeros(n), &space, &cfg.with_max_iter(8).with_range_restriction(false)).unwrap();
        assert_eq!(r3.iterations, 8);
        let (rc, rr) = (norm(&residual(&a, &b, &cycle.x)), norm(&residual(&a, &b, &r3.x)));
        assert!((rc - rr).abs() <= 1e-9 * rr, "{rc} {rr}");
        assert!((cycle.history.last().unwrap().residual_estimate - rc).abs() <= 1e-9 * rc);
    }
}

#[test]
fn cycle_beats_plain_gmres_and_meets_constraint() {
    let n = 40;
    for seed in 0..4u64 {
        let a = clustered(n, 40 + seed);
        let b = a.matvec(&random_vec(n, 50 + seed));
        let w = gaussian(n, 3, 60 + seed);
        let m = 12;
        let cfg = SolverConfig::default().with_tol(1e-30);
        let cycle = fgmres_augmented_cycle(&a, &b, &zeros(n), &w, m, &cfg).unwrap();
        let g = gmres_solve(&a, &b, &zeros(n), &cfg.with_max_iter(m)).unwrap();
        let r = residual(&a, &b, &cycle.x);
        assert!(norm(&r) <= norm(&residual(&a, &b, &g.x)) + 1e-10 * norm(&b));

        let space = AugmentationSpace::build(&a, &w).unwrap();
        let mut arnoldi = ArnoldiState::new(&a, &b, false, ArnoldiConfig::default()).unwrap();
        for _ in 0..m {
            arnoldi.step(&a);
        }
        let mut lhs = DMatrix::zeros(n, 3 + m);
        lhs.view_mut((0, 0), (n, 3)).copy_from(&to_na(space.c()));
        lhs.view_mut((0, 3), (n, m)).copy_from(&(to_na(&a) * to_na(&arnoldi.basis_matrix(m))));
        assert!(constraint_ratio(&lhs, &r) <= 1e-8, "{:e}", constraint_ratio(&lhs, &r));
    }
}

#[test]
fn history_is_monotone_and_one_entry_per_step() {
    let n = 30;
    let a = conditioned(n, 1e2, 70);
    let b = random_vec(n, 71);
    let w = gaussian(n, 3, 72);
    let rep = fgmres_augmented_cycle(&a, &b, &zeros(n), &w, 6, &SolverConfig::default().with_diagnostics(true)).unwrap();
    assert_eq!(rep.history.len(), 9);
    assert_eq!(rep.iterates.len(), 9);
    assert_eq!(rep.matvec_count, 9);
    for h in rep.history.windows(2) {
        assert!(h[1].residual_estimate <= h[0].residual_estimate * (1.0 + 1e-14));
    }
    for h in &rep.history {
        let t = h.true_residual.unwrap();
        assert!((t - h.residual_estimate).abs() <= 1e-10 * norm(&b));
    }
}

#[test]
fn rejects_bad_cycle_shapes() {
    let a = DenseMatrix::identity(4);
    let b = vec![1.0; 4];
    let cfg = SolverConfig::default();
    assert!(matches!(fgmres_augmented_cycle(&a, &b, &zeros(4), &DenseMatrix::zeros(4, 1), 0, &cfg), Err(Error::InvalidArgument(_))));
    assert!(matches!(fgmres_augmented_cycle(&a, &b, &zeros(4), &DenseMatrix::zeros(4, 2), 3, &cfg), Err(Error::InvalidArgument(_))));
    assert!(matches!(
        fgmres_augmented_cycle(&a, &b, &zeros(4), &DenseMatrix::zeros(3, 1), 1, &cfg),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn breakdown_ends_the_cycle_with_the_solution() {
    // A = I: the Krylov space is exhausted after one step.
    let a = DenseMatrix::identity(6);
    let b = random_vec(6, 80);
    let rep = fgmres_augmented_cycle(&a, &b, &zeros(6), &gaussian(6, 2, 81), 3, &SolverConfig::default()).unwrap();
    assert_eq!(rep.stop_reason, StopReason::Breakdown);
    assert!(diff_norm(&rep.x, &b) <= 1e-14 * norm(&b));
}
