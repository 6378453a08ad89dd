//! Experiment harness around `mpfgmres`: single solves, `u_L` by `u_R`
//! sweeps and precision recommendations, written as CSV and text reports.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_settings, ExperimentConfig, ProblemSpec, Tolerance};
pub use run::{prepare, run_cell, run_grid, run_recommend, run_single, Cell, GridCell, Prepared, RecommendOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("preconditioner singular in {format} (zero pivot at index {index})")]
    SingularPreconditioner { format: String, index: usize },

    #[error(transparent)]
    Core(#[from] mpfgmres::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SingularPreconditioner { .. } | CliError::Core(mpfgmres::Error::SingularInFormat { .. }) => 3,
            _ => 1,
        }
    }
}
