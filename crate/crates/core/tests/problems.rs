mod common;

use augkrylov::linalg::sub;
use augkrylov::problems::{add_noise, aug_basis_boundary, deriv2, first_node_after, gravity, GRAVITY_DEFAULT_DEPTH};
use augkrylov::{gmres_solve, r3gmres_solve, AugmentationSpace, SolverConfig};
use common::*;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[test]
fn deriv2_consistency_decays_quadratically() {
    let mut last = None;
    for n in [32usize, 64, 128, 256, 512] {
        let p = deriv2(n).unwrap();
        let err = inf_norm(&sub(&p.a.matvec(&p.x_true), &p.b_true));
        assert!(err <= p.consistency_bound);
        if let Some(prev) = last {
            let ratio: f64 = prev / err;
            // Doubling n divides the defect by about four.
            assert!((3.5..=4.5).contains(&ratio), "n = {n}: {ratio}");
        }
        last = Some(err);
    }
}

#[test]
fn gravity_is_severely_ill_conditioned() {
    let p = gravity(256, GRAVITY_DEFAULT_DEPTH, None).unwrap();
    let s = to_na(&p.a).singular_values();
    let mut sorted: Vec<f64> = s.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert!(sorted[0] / sorted[255] > 1e10);
    // Smooth decay: no gap of more than two orders between neighbours above roundoff.
    for w in sorted.windows(2).take_while(|w| w[1] > 1e-13 * sorted[0]) {
        assert!(w[0] / w[1] < 100.0);
    }
}

#[test]
fn noise_level_is_exact_for_problem_data() {
    let p = gravity(128, 0.25, Some(0.5)).unwrap().with_noise(1e-4, 9).unwrap();
    let rel = norm(&sub(&p.b_noisy, &p.b_true)) / norm(&p.b_true);
    assert!((rel - 1e-4).abs() <= 1e-15);
    assert_eq!(p.b_noisy, add_noise(&p.b_true, 1e-4, 9).unwrap());
    assert_eq!(first_node_after(128, 0.5), 65);
}

#[test]
fn boundary_basis_helps_deriv2_early() {
    let n = 256;
    let p = deriv2(n).unwrap().with_noise(1e-5, 1).unwrap();
    let space = AugmentationSpace::build(&p.a, &aug_basis_boundary(n).unwrap()).unwrap();
    let cfg = SolverConfig::default().with_tol(1e-30).with_max_iter(10).with_range_restriction(true).with_diagnostics(true);
    let mut aug = r3gmres_solve(&p.a, &p.b_noisy, &vec![0.0; n], &space, &cfg).unwrap();
    let mut plain = gmres_solve(&p.a, &p.b_noisy, &vec![0.0; n], &cfg).unwrap();
    aug.attach_reference(&p.x_true);
    plain.attach_reference(&p.x_true);
    for (x, y) in aug.history.iter().zip(&plain.history) {
        assert!(x.relative_error.unwrap() < y.relative_error.unwrap(), "iteration {}", x.iteration);
    }
}
