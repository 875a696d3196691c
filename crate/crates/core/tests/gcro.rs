mod common;

use augkrylov::{gcro_solve, gmres_solve, AugmentationSpace, GcroState, SolverConfig, StopReason};
use common::*;
use nalgebra::DMatrix;

fn projected_lhs(a: &augkrylov::DenseMatrix, space: &AugmentationSpace, state: &GcroState, j: usize) -> DMatrix<f64> {
    let an = to_na(a);
    let k = space.k();
    let n = a.rows();
    let mut w = DMatrix::zeros(n, k + j);
    w.view_mut((0, 0), (n, k)).copy_from(&to_na(space.c()));
    for c in 0..j {
        let v = na_vec(state.arnoldi().basis_vector(c));
        w.set_column(k + c, &(&an * v));
    }
    w
}

#[test]
fn without_augmentation_matches_gmres() {
    for rr in [false, true] {
        let a = conditioned(30, 1e3, 4);
        let b = random_vec(30, 5);
        let cfg = SolverConfig::default().with_tol(1e-10).with_max_iter(25).with_range_restriction(rr);
        let space = AugmentationSpace::empty(30);
        let g = gcro_solve(&a, &b, &vec![0.0; 30], &space, &cfg).unwrap();
        let plain = gmres_solve(&a, &b, &vec![0.0; 30], &cfg).unwrap();
        assert_eq!(g.iterations, plain.iterations);
        for (p, q) in g.history.iter().zip(&plain.history) {
            assert!((p.residual_estimate - q.residual_estimate).abs() <= 1e-12 * q.residual_estimate.max(1e-300));
        }
        assert!(diff_norm(&g.x, &plain.x) <= 1e-10 * norm(&plain.x));
    }
}

#[test]
fn exact_error_in_augmentation_space() {
    let n = 20;
    let a = conditioned(n, 10.0, 9);
    let x_true = random_vec(n, 10);
    let b = a.matvec(&x_true);
    let u = augkrylov::DenseMatrix::from_columns(n, &[x_true.clone(), random_vec(n, 11)]).unwrap();
    let space = AugmentationSpace::build(&a, &u).unwrap();
    let rep = gcro_solve(&a, &b, &vec![0.0; n], &space, &SolverConfig::default().with_tol(1e-10)).unwrap();
    assert_eq!(rep.stop_reason, StopReason::Converged);
    assert!(rep.iterations <= 1);
    assert!(norm(&residual(&a, &b, &rep.x)) <= 1e-10 * norm(&b));
}

#[test]
fn decoupled_coefficients_match_coupled_least_squares() {
    let n = 20;
    for (seed, rr) in [(1u64, false), (2, true), (3, false)] {
        let a = conditioned(n, 1e2, seed);
        let b = random_vec(n, seed + 100);
        let space = AugmentationSpace::build(&a, &gaussian(n, 2, seed + 200)).unwrap();
        let cfg = SolverConfig::default().with_range_restriction(rr);
        let mut state = GcroState::new(&a, &b, &space, &cfg).unwrap().unwrap();
        for _ in 0..5 {
            state.step(&a);
        }
        let (z, y) = state.coefficients().unwrap();
        let w = projected_lhs(&a, &space, &state, 5);
        let oracle = na_lstsq(&w, &b);
        let ours: Vec<f64> = z.iter().chain(&y).copied().collect();
        assert!(diff_norm(&ours, &oracle) <= 1e-10 * norm(&oracle), "{:e}", diff_norm(&ours, &oracle));
        // Residual norm monitored by the state is the coupled minimum.
        let r = residual(&a, &b, &state.iterate(&vec![0.0; n]).unwrap());
        assert!((norm(&r) - state.residual_norm()).abs() <= 1e-10 * norm(&b));
    }
}

#[test]
fn projected_basis_is_orthogonal_to_c() {
    let n = 40;
    let a = conditioned(n, 1e4, 21);
    let b = random_vec(n, 22);
    let space = AugmentationSpace::build(&a, &gaussian(n, 3, 23)).unwrap();
    for rr in [false, true] {
        let cfg = SolverConfig::default().with_range_restriction(rr);
        let mut state = GcroState::new(&a, &b, &space, &cfg).unwrap().unwrap();
        for _ in 0..15 {
            state.step(&a);
        }
        let ctv = to_na(space.c()).transpose() * to_na(&state.arnoldi().basis_matrix(16));
        assert!(ctv.amax() <= 1e-10, "{:e}", ctv.amax());
        // B_j = Cᵀ A V_j
        let bj = to_na(space.c()).transpose() * to_na(&a) * to_na(&state.arnoldi().basis_matrix(15));
        assert!((bj - to_na(&state.b_matrix())).amax() <= 1e-12 * to_na(&a).norm());
    }
}

#[test]
fn converged_residual_satisfies_constraint() {
    let n = 40;
    for seed in 0..5u64 {
        let a = clustered(n, 300 + seed);
        assert!(na_cond(&a) <= 1e4);
        // Consistent data keeps ‖x‖ ≈ ‖b‖, so rounding in b − A x stays far below tol.
        let b = a.matvec(&random_vec(n, 400 + seed));
        let space = AugmentationSpace::build(&a, &gaussian(n, 3, 500 + seed)).unwrap();
        let cfg = SolverConfig::default().with_tol(1e-6).with_max_iter(n);
        let rep = gcro_solve(&a, &b, &vec![0.0; n], &space, &cfg).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations < n - 3);
        // Rebuild [C, A V_j] from a fresh state run for the same number of steps.
        let mut state = GcroState::new(&a, &b, &space, &cfg).unwrap().unwrap();
        for _ in 0..rep.iterations {
            state.step(&a);
        }
        let w = projected_lhs(&a, &space, &state, rep.iterations);
        let r = residual(&a, &b, &rep.x);
        assert!(constraint_ratio(&w, &r) <= 1e-8, "{:e}", constraint_ratio(&w, &r));
    }
}

#[test]
fn matvec_count_is_iterations_plus_setup() {
    let n = 30;
    let a = conditioned(n, 1e3, 71);
    let b = random_vec(n, 72);
    let space = AugmentationSpace::build(&a, &gaussian(n, 2, 73)).unwrap();
    for rr in [false, true] {
        let cfg = SolverConfig::default().with_tol(1e-8).with_range_restriction(rr);
        let rep = gcro_solve(&a, &b, &vec![0.0; n], &space, &cfg).unwrap();
        assert_eq!(rep.matvec_count, rep.iterations + usize::from(rr));
    }
}

