use augkrylov::problems::TestProblem;
use augkrylov::{
    fgmres_augmented_cycle, gcro_solve, gmres_solve, r3gmres_reference, r3gmres_solve, AugmentationSpace, DenseMatrix,
    SolveReport, SolverConfig,
};
use serde::Deserialize;

use crate::config::{ExperimentConfig, Method, Resolved};
use crate::HarnessError;

pub const CSV_HEADER: [&str; 4] = ["iteration", "residual_estimate", "true_residual", "relative_error"];

/// A finished run: resolved configuration, the problem and the solver report
/// with relative errors filled in.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub resolved: Resolved,
    pub problem: TestProblem,
    pub report: SolveReport,
    /// Only set for `r3gmres-ref`.
    pub rank_deficient_iterations: Vec<usize>,
}

impl Experiment {
    pub fn final_relative_error(&self) -> f64 {
        self.report.final_relative_error(&self.problem.x_true)
    }

    /// `method=… iterations=… final_relative_error=… best_error=… best_iteration=… matvecs=…`
    pub fn summary_line(&self) -> String {
        let best = self.report.best_relative_error().map_or(String::from("-"), fmt_float);
        let best_it = self.report.best_error_iteration.map_or(String::from("-"), |j| j.to_string());
        format!(
            "method={} iterations={} converged={} final_relative_error={} best_error={} best_iteration={} matvecs={}",
            self.resolved.config.method.name(),
            self.report.iterations,
            self.report.converged,
            fmt_float(self.final_relative_error()),
            best,
            best_it,
            self.report.matvec_count,
        )
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), fmt_float)
}

fn space_error(e: augkrylov::Error) -> HarnessError {
    HarnessError::Config(format!("unusable augmentation basis: {e}"))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment, HarnessError> {
    let resolved = config.resolve()?;
    let problem = resolved.build_problem()?;
    let basis = resolved.build_basis()?;
    let n = problem.n();
    let x0 = vec![0.0; n];
    let b = &problem.b_noisy;
    let a = &problem.a;
    let rr = !config.plain_start;
    let cfg = SolverConfig::default()
        .with_tol(config.tol)
        .with_max_iter(config.maxit)
        .with_diagnostics(resolved.diagnostics);
    let space = || match &basis {
        Some(u) => AugmentationSpace::build(a, u).map_err(space_error),
        None => Ok(AugmentationSpace::empty(n)),
    };
    let mut deficient = Vec::new();
    let mut report = match config.method {
        Method::Gmres => gmres_solve(a, b, &x0, &cfg.with_range_restriction(false))?,
        Method::Rrgmres => gmres_solve(a, b, &x0, &cfg.with_range_restriction(true))?,
        Method::R3gmres => r3gmres_solve(a, b, &x0, &space()?, &cfg.with_range_restriction(rr))?,
        Method::R3gmresRef => {
            let out = r3gmres_reference(a, b, &x0, &space()?, &cfg.with_range_restriction(rr))?;
            deficient = out.rank_deficient_iterations;
            out.report
        }
        Method::Gcro => gcro_solve(a, b, &x0, &space()?, &cfg.with_range_restriction(rr))?,
        Method::FgmresAug => {
            let w = basis.clone().unwrap_or_else(|| DenseMatrix::zeros(n, 0));
            if config.maxit + w.cols() > n {
                return Err(HarnessError::Config(format!("maxit + k exceeds n = {n}")));
            }
            fgmres_augmented_cycle(a, b, &x0, &w, config.maxit, &cfg)?
        }
    };
    report.attach_reference(&problem.x_true);
    Ok(Experiment { resolved, problem, report, rank_deficient_iterations: deficient })
}

/// Per-iteration history as CSV: fixed header, `{:.16e}` floats, empty
/// fields for values that were not computed, LF line endings.
pub fn history_csv(report: &SolveReport) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for rec in &report.history {
        w.write_record([
            rec.iteration.to_string(),
            fmt_float(rec.residual_estimate),
            fmt_opt(rec.true_residual),
            fmt_opt(rec.relative_error),
        ])?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareFile {
    run: Vec<ExperimentConfig>,
}

/// Parses a TOML list of `[[run]]` tables.
pub fn load_compare_file(text: &str) -> Result<Vec<ExperimentConfig>, HarnessError> {
    let file: CompareFile = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    if file.run.is_empty() {
        return Err(HarnessError::Config("no [[run]] entries".into()));
    }
    Ok(file.run)
}

/// Runs every config on the same problem and joins the histories by
/// iteration: `iteration,<label>_residual_estimate,<label>_true_residual,<label>_relative_error,…`.
/// Duplicate labels get a `#2`, `#3`, … suffix.
pub fn compare_methods(configs: &[ExperimentConfig]) -> Result<Vec<u8>, HarnessError> {
    let first = configs.first().ok_or_else(|| HarnessError::Config("nothing to compare".into()))?;
    let key = first.resolve()?.problem_key();
    for c in &configs[1..] {
        if c.resolve()?.problem_key() != key {
            return Err(HarnessError::Config(format!(
                "run '{}' uses a different problem definition than '{}'",
                c.label(),
                first.label()
            )));
        }
    }
    let mut labels: Vec<String> = Vec::new();
    for c in configs {
        let base = c.label();
        let mut label = base.clone();
        let mut i = 2;
        while labels.contains(&label) {
            label = format!("{base}#{i}");
            i += 1;
        }
        labels.push(label);
    }
    let runs = configs.iter().map(run_experiment).collect::<Result<Vec<_>, _>>()?;
    let rows = runs.iter().map(|r| r.report.history.len()).max().unwrap_or(0);

    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec![String::from("iteration")];
    for l in &labels {
        for col in &CSV_HEADER[1..] {
            header.push(format!("{l}_{col}"));
        }
    }
    w.write_record(&header)?;
    for i in 0..rows {
        let mut rec = vec![(i + 1).to_string()];
        for r in &runs {
            match r.report.history.get(i) {
                Some(h) => {
                    rec.push(fmt_float(h.residual_estimate));
                    rec.push(fmt_opt(h.true_residual));
                    rec.push(fmt_opt(h.relative_error));
                }
                None => rec.extend([String::new(), String::new(), String::new()]),
            }
        }
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
}

/// `‖x − x_true‖` over the 1-based indices `center − half_width ..= center + half_width`
/// (clipped to the grid).
pub fn windowed_error(x: &[f64], x_true: &[f64], center: usize, half_width: usize) -> f64 {
    let n = x.len();
    let lo = center.saturating_sub(half_width).max(1);
    let hi = (center + half_width).min(n);
    (lo..=hi).map(|i| (x[i - 1] - x_true[i - 1]).powi(2)).sum::<f64>().sqrt()
}
