use std::path::{Path, PathBuf};
use std::process::ExitCode;

use augkrylov::DenseMatrix;
use augkrylov_harness::config::{AugKind, Diagnostics, ExperimentConfig, Method, ProblemKind};
use augkrylov_harness::matrix_io::write_matrix;
use augkrylov_harness::{compare_methods, history_csv, load_compare_file, run_experiment, HarnessError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "augkrylov", version, about = "Augmented Krylov solver experiments on ill-posed test problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write its per-iteration history as CSV.
    Run(RunArgs),
    /// Run a TOML list of `[[run]]` configurations on one problem and join their histories.
    Compare {
        file: PathBuf,
        /// Output CSV; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a test problem's matrix (and optionally its noisy right-hand side) in text form.
    Export {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        rhs: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum)]
    problem: ProblemKind,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Relative noise level [default: 1e-5 for deriv2, 1e-4 otherwise]
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Gravity source depth.
    #[arg(long, default_value_t = augkrylov::problems::GRAVITY_DEFAULT_DEPTH)]
    depth: f64,
    /// True jump location for gravity-mislocated [default: 0.59]
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "r3gmres")]
    method: Method,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    maxit: usize,
    /// Augmentation basis [default: boundary for deriv2, step otherwise; none for gmres/rrgmres]
    #[arg(long, value_enum)]
    aug: Option<AugKind>,
    /// 1-based start of the step basis [default: first node after t = 1/2]
    #[arg(long)]
    jump_index: Option<usize>,
    /// Start the augmented methods from r0 instead of A r0.
    #[arg(long)]
    plain_start: bool,
    #[arg(long, value_enum, default_value = "auto")]
    diagnostics: Diagnostics,
    /// Output CSV; only the summary is printed when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> ExperimentConfig {
        let p = &self.problem;
        ExperimentConfig {
            n: p.n,
            noise: p.noise,
            seed: p.seed,
            tol: self.tol,
            maxit: self.maxit,
            aug: self.aug,
            jump_index: self.jump_index,
            depth: p.depth,
            tau: p.tau,
            plain_start: self.plain_start,
            diagnostics: self.diagnostics,
            ..ExperimentConfig::new(p.problem, self.method)
        }
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), HarnessError> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run(args) => {
            let exp = run_experiment(&args.config())?;
            if let Some(out) = &args.out {
                write_output(Some(out), &history_csv(&exp.report)?)?;
            }
            println!("{}", exp.summary_line());
        }
        Command::Compare { file, out } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", file.display())))?;
            let configs = load_compare_file(&text)?;
            write_output(out.as_deref(), &compare_methods(&configs)?)?;
        }
        Command::Export { problem, out, rhs } => {
            let cfg = ExperimentConfig {
                n: problem.n,
                noise: problem.noise,
                seed: problem.seed,
                depth: problem.depth,
                tau: problem.tau,
                ..ExperimentConfig::new(problem.problem, Method::Gmres)
            };
            let p = cfg.resolve()?.build_problem()?;
            std::fs::write(&out, write_matrix(&p.a))?;
            if let Some(rhs) = rhs {
                let b = DenseMatrix::from_col_major(p.n(), 1, p.b_noisy.clone())?;
                std::fs::write(rhs, write_matrix(&b))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("augkrylov: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
