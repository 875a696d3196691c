//! Discretized first-kind Fredholm test problems, noise, and augmentation bases.
//!
//! Both generators use midpoint collocation on `[0, 1]`: nodes
//! `s_i = (i − 1/2)/n` and `A_ij = K(s_i, s_j)/n`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_core::RngCore;
use rand_xoshiro::SplitMix64;

use crate::error::Error;
use crate::linalg::{norm2, DenseMatrix};

/// Default depth of the gravity source layer.
pub const GRAVITY_DEFAULT_DEPTH: f64 = 0.25;

#[derive(Clone, Debug)]
pub struct TestProblem {
    pub a: DenseMatrix,
    pub x_true: Vec<f64>,
    pub b_true: Vec<f64>,
    /// Equal to `b_true` until [`TestProblem::with_noise`] is applied.
    pub b_noisy: Vec<f64>,
    pub noise_level: f64,
    pub seed: u64,
    /// Declared bound on `‖A x_true − b_true‖_∞`.
    pub consistency_bound: f64,
}

impl TestProblem {
    /// Replaces `b_noisy` by `b_true` plus seeded Gaussian noise of relative size `rel_level`.
    pub fn with_noise(mut self, rel_level: f64, seed: u64) -> Result<Self, Error> {
        self.b_noisy = add_noise(&self.b_true, rel_level, seed)?;
        self.noise_level = rel_level;
        self.seed = seed;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x_true.len()
    }
}

/// Midpoint nodes `s_i = (i − 1/2)/n`, `i = 1..n`.
pub fn midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// Green's function of the second derivative with homogeneous boundary values.
fn deriv2_kernel(s: f64, t: f64) -> f64 {
    if s <= t {
        s * (t - 1.0)
    } else {
        t * (s - 1.0)
    }
}

/// Second-derivative problem with solution `f(t) = t` and exact data
/// `g(s) = (s³ − s)/6`.
pub fn deriv2(n: usize) -> Result<TestProblem, Error> {
    if n < 2 {
        return Err(Error::InvalidArgument("deriv2 needs n >= 2"));
    }
    let s = midpoints(n);
    let h = 1.0 / n as f64;
    let a = DenseMatrix::from_fn(n, n, |i, j| h * deriv2_kernel(s[i], s[j]));
    let x_true = s.clone();
    let b_true: Vec<f64> = s.iter().map(|&si| (si * si * si - si) / 6.0).collect();
    Ok(TestProblem {
        a,
        x_true,
        b_noisy: b_true.clone(),
        b_true,
        noise_level: 0.0,
        seed: 0,
        consistency_bound: 5.0 / (n * n) as f64,
    })
}

/// One-dimensional gravity surveying problem with kernel
/// `d (d² + (s − t)²)^(−3/2)` and solution `sin(πt) + ½ sin(2πt)`, plus a unit
/// step for `t > τ` when `discontinuity_at = Some(τ)`. Data are `b = A x`.
pub fn gravity(n: usize, depth: f64, discontinuity_at: Option<f64>) -> Result<TestProblem, Error> {
    if n < 2 {
        return Err(Error::InvalidArgument("gravity needs n >= 2"));
    }
    if !(depth > 0.0) || !depth.is_finite() {
        return Err(Error::InvalidArgument("gravity depth must be positive"));
    }
    let s = midpoints(n);
    let h = 1.0 / n as f64;
    let a = DenseMatrix::from_fn(n, n, |i, j| {
        let diff = s[i] - s[j];
        h * depth * libm::pow(depth * depth + diff * diff, -1.5)
    });
    let x_true: Vec<f64> = s
        .iter()
        .map(|&t| {
            let smooth = libm::sin(PI * t) + 0.5 * libm::sin(2.0 * PI * t);
            match discontinuity_at {
                Some(tau) if t > tau => smooth + 1.0,
                _ => smooth,
            }
        })
        .collect();
    let b_true = a.matvec(&x_true);
    Ok(TestProblem {
        a,
        x_true,
        b_noisy: b_true.clone(),
        b_true,
        noise_level: 0.0,
        seed: 0,
        consistency_bound: 0.0,
    })
}

/// Portable standard-normal stream: SplitMix64 words mapped to uniforms with
/// 53-bit resolution, then paired Box–Muller.
pub struct NormalStream {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        use rand_core::SeedableRng;
        NormalStream { rng: SplitMix64::seed_from_u64(seed), spare: None }
    }

    fn uniform_open0(&mut self) -> f64 {
        // (0, 1]
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn uniform(&mut self) -> f64 {
        // [0, 1)
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * PI * u2;
        self.spare = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }
}

/// `b + e` with `e` Gaussian, rescaled so that `‖e‖ = rel_level · ‖b‖` exactly.
pub fn add_noise(b: &[f64], rel_level: f64, seed: u64) -> Result<Vec<f64>, Error> {
    if !(rel_level >= 0.0) || !rel_level.is_finite() {
        return Err(Error::InvalidArgument("noise level must be nonnegative"));
    }
    if rel_level == 0.0 {
        return Ok(b.to_vec());
    }
    let mut stream = NormalStream::new(seed);
    let e: Vec<f64> = (0..b.len()).map(|_| stream.next_normal()).collect();
    let factor = rel_level * norm2(b) / norm2(&e);
    Ok(b.iter().zip(&e).map(|(bi, ei)| bi + factor * ei).collect())
}

/// `[1, 1, …, 1]` and `[1, 2, …, n]` as columns.
pub fn aug_basis_boundary(n: usize) -> Result<DenseMatrix, Error> {
    if n < 2 {
        return Err(Error::InvalidArgument("boundary basis needs n >= 2"));
    }
    Ok(DenseMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { (i + 1) as f64 }))
}

/// Step vector with zeros before the 1-based `jump_index` and ones from it on.
pub fn aug_basis_step(n: usize, jump_index: usize) -> Result<DenseMatrix, Error> {
    if jump_index < 1 || jump_index > n {
        return Err(Error::InvalidArgument("jump index must lie in 1..=n"));
    }
    Ok(DenseMatrix::from_fn(n, 1, |i, _| if i + 1 >= jump_index { 1.0 } else { 0.0 }))
}

/// 1-based index of the first midpoint node strictly greater than `t`.
pub fn first_node_after(n: usize, t: f64) -> usize {
    midpoints(n).iter().position(|&s| s > t).map_or(n + 1, |i| i + 1)
}
