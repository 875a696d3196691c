//! Experiment runner for the `augkrylov` solvers: problem setup from a
//! config, per-iteration CSV histories, method comparison tables and a plain
//! text matrix format.

pub mod config;
pub mod matrix_io;
pub mod run;

pub use config::{AugKind, Diagnostics, ExperimentConfig, Method, ProblemKind, Resolved};
pub use run::{compare_methods, history_csv, load_compare_file, run_experiment, windowed_error, Experiment};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] augkrylov::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed matrix file: {0}")]
    Format(String),
}

impl HarnessError {
    /// 2 for configuration problems, 3 for everything that fails while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 3,
        }
    }
}
