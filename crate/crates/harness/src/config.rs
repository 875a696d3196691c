//! Experiment configuration shared by the `run` and `compare` subcommands.

use augkrylov::problems::{self, first_node_after, TestProblem, GRAVITY_DEFAULT_DEPTH};
use augkrylov::DenseMatrix;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Default location of the true jump for `gravity-mislocated`.
pub const MISLOCATED_TAU: f64 = 0.59;

/// Location of the jump for `gravity` and of the assumed jump for `gravity-mislocated`.
pub const ASSUMED_TAU: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Deriv2,
    /// Jump at `t = 1/2`.
    Gravity,
    /// True jump at `tau` (default 0.59); the step basis still assumes `t = 1/2`.
    GravityMislocated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Gmres,
    Rrgmres,
    R3gmres,
    R3gmresRef,
    Gcro,
    FgmresAug,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gmres => "gmres",
            Method::Rrgmres => "rrgmres",
            Method::R3gmres => "r3gmres",
            Method::R3gmresRef => "r3gmres-ref",
            Method::Gcro => "gcro",
            Method::FgmresAug => "fgmres-aug",
        }
    }

    pub fn augmented(self) -> bool {
        !matches!(self, Method::Gmres | Method::Rrgmres)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AugKind {
    None,
    Boundary,
    Step,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagnostics {
    /// On for `n ≤ 1024`.
    #[default]
    Auto,
    On,
    Off,
}

/// One experiment. Optional fields fall back to problem-dependent defaults,
/// see [`ExperimentConfig::resolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Relative noise level; 1e-5 for deriv2 and 1e-4 for gravity when absent.
    #[serde(default)]
    pub noise: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub method: Method,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_maxit")]
    pub maxit: usize,
    /// Boundary basis for deriv2, step basis for gravity when absent and the method augments.
    #[serde(default)]
    pub aug: Option<AugKind>,
    /// 1-based start of the step basis; first node after `t = 1/2` when absent.
    #[serde(default)]
    pub jump_index: Option<usize>,
    #[serde(default = "default_depth")]
    pub depth: f64,
    /// True jump location for `gravity-mislocated`.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Use `w₀ = r₀` instead of `A r₀` for the augmented methods.
    #[serde(default)]
    pub plain_start: bool,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    /// Column prefix in comparison tables; the method name when absent.
    #[serde(default)]
    pub label: Option<String>,
}

fn default_n() -> usize {
    256
}
fn default_seed() -> u64 {
    1
}
fn default_tol() -> f64 {
    1e-8
}
fn default_maxit() -> usize {
    50
}
fn default_depth() -> f64 {
    GRAVITY_DEFAULT_DEPTH
}

impl ExperimentConfig {
    pub fn new(problem: ProblemKind, method: Method) -> Self {
        ExperimentConfig {
            problem,
            n: default_n(),
            noise: None,
            seed: default_seed(),
            method,
            tol: default_tol(),
            maxit: default_maxit(),
            aug: None,
            jump_index: None,
            depth: default_depth(),
            tau: None,
            plain_start: false,
            diagnostics: Diagnostics::Auto,
            label: None,
        }
    }

    /// Fills defaults and validates.
    pub fn resolve(&self) -> Result<Resolved, HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        let noise = self.noise.unwrap_or(match self.problem {
            ProblemKind::Deriv2 => 1e-5,
            _ => 1e-4,
        });
        if !(0.0..1.0).contains(&noise) {
            return bad(format!("noise must lie in [0, 1), got {noise}"));
        }
        if self.maxit < 1 {
            return bad("maxit must be at least 1".into());
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.depth > 0.0) || !self.depth.is_finite() {
            return bad(format!("depth must be positive, got {}", self.depth));
        }
        let aug = match (self.aug, self.method.augmented()) {
            (Some(AugKind::None), _) | (None, false) => AugKind::None,
            (Some(a), false) => return bad(format!("method {} takes no augmentation, got {a:?}", self.method.name())),
            (Some(a), true) => a,
            (None, true) => match self.problem {
                ProblemKind::Deriv2 => AugKind::Boundary,
                _ => AugKind::Step,
            },
        };
        let jump_index = self.jump_index.unwrap_or_else(|| first_node_after(self.n, ASSUMED_TAU));
        if jump_index < 1 || jump_index > self.n {
            return bad(format!("jump index must lie in 1..={}, got {jump_index}", self.n));
        }
        let tau = match self.problem {
            ProblemKind::Deriv2 => None,
            ProblemKind::Gravity => Some(self.tau.unwrap_or(ASSUMED_TAU)),
            ProblemKind::GravityMislocated => Some(self.tau.unwrap_or(MISLOCATED_TAU)),
        };
        if let Some(t) = tau {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("tau must lie in [0, 1], got {t}"));
            }
        }
        let diagnostics = match self.diagnostics {
            Diagnostics::Auto => self.n <= 1024,
            Diagnostics::On => true,
            Diagnostics::Off => false,
        };
        Ok(Resolved { config: self.clone(), noise, aug, jump_index, tau, diagnostics })
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.method.name().to_string())
    }
}

/// An [`ExperimentConfig`] with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub noise: f64,
    pub aug: AugKind,
    pub jump_index: usize,
    pub tau: Option<f64>,
    pub diagnostics: bool,
}

impl Resolved {
    pub fn build_problem(&self) -> Result<TestProblem, HarnessError> {
        let c = &self.config;
        let p = match c.problem {
            ProblemKind::Deriv2 => problems::deriv2(c.n)?,
            ProblemKind::Gravity | ProblemKind::GravityMislocated => problems::gravity(c.n, c.depth, self.tau)?,
        };
        Ok(p.with_noise(self.noise, c.seed)?)
    }

    pub fn build_basis(&self) -> Result<Option<DenseMatrix>, HarnessError> {
        let n = self.config.n;
        Ok(match self.aug {
            AugKind::None => None,
            AugKind::Boundary => Some(problems::aug_basis_boundary(n)?),
            AugKind::Step => Some(problems::aug_basis_step(n, self.jump_index)?),
        })
    }

    /// Everything that determines the test problem, for comparing runs.
    pub fn problem_key(&self) -> (ProblemKind, usize, u64, u64, u64, Option<u64>) {
        let c = &self.config;
        let depth = if c.problem == ProblemKind::Deriv2 { 0 } else { c.depth.to_bits() };
        (c.problem, c.n, self.noise.to_bits(), c.seed, depth, self.tau.map(f64::to_bits))
    }
}
