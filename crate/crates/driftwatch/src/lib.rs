//! Experiment harness and file plumbing around `driftwatch-core`: CSV
//! ingestion, TOML experiment configs, the Monte-Carlo drift grids, timing
//! probes, report emission, and plain-text model persistence. The `driftwatch`
//! binary is a thin shell over this library.

pub mod config;
pub mod csv_io;
pub mod harness;
pub mod model_store;
pub mod report;

use std::path::PathBuf;

pub use config::{ApproachSpec, ExperimentConfig, OutputFormat};
pub use csv_io::load_dataset;
pub use harness::{
    default_ratio_grid, run_budget_bench, run_problem1_experiment, run_problem2_experiment,
    run_ratio_sweep, FusionLayout,
};
pub use model_store::{load_model, save_model};
pub use report::{emit_report, AccuracyTable, RateKind, ResultRow, ResultTable};

/// Umbrella error for the harness side: core failures plus file handling.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: row {row}, column {col}: {detail}")]
    Parse {
        path: PathBuf,
        row: usize,
        col: usize,
        detail: String,
    },
    #[error("{path}: no data rows")]
    EmptyFile { path: PathBuf },
    #[error("infeasible ratio k={k}, n={n}: {detail}")]
    RatioInfeasible { k: usize, n: usize, detail: String },
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },
    #[error(transparent)]
    Core(#[from] driftwatch_core::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
