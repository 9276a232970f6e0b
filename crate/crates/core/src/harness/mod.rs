//! Experiment harness: benchmark problems, datasets, the naive baseline,
//! configuration and result files.

mod config;
mod dataset;
mod experiment;
mod functions;
mod ne;

use thiserror::Error;

use crate::adadisc::AdadiscError;
use crate::cone::ConeError;
use crate::gp::GpError;
use crate::metrics::MetricsError;
use crate::vogp::VogpError;

pub use config::{Algorithm, KernelMode, ProblemSource, RunConfig};
pub use dataset::{
    branin_currin_dataset, gp_sample_dataset, load_dataset_csv, parse_dataset_csv, scaled_objectives, Dataset,
};
pub use experiment::{
    aggregate, check_consistency, continuous_kernel, load_records, median_usize, read_records, run_experiment,
    run_vogp_on_dataset, write_outputs, Aggregate, ContinuousProblem, ExperimentResult, Record, RoundLine,
    SeedMetrics, SeedRun, SeedSummary, Stat, SummaryFile, HV_FLOOR,
};
pub use functions::{branin, builtin_dim, builtin_objective, currin, zdt3, BUILTIN_FUNCTIONS};
pub use ne::{naive_elimination, NeOutcome};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown function {0:?}")]
    UnknownName(String),
    #[error("point {0:?} is outside the unit cube")]
    OutOfDomain(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("non-numeric cell {value:?} at data row {row}, column {col}")]
    NonNumericCell { row: usize, col: usize, value: String },
    #[error("need at least 2 data rows, found {0}")]
    TooFewRows(usize),
    #[error("csv: {0}")]
    Csv(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid records: {0}")]
    InvalidRecords(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Vogp(#[from] VogpError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Adadisc(#[from] AdadiscError),
}
