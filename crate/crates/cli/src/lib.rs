//! Command-line runtime for countnet: data ingestion, holdout splits,
//! chain orchestration, artifact persistence, prediction export, and
//! report comparison.

pub mod error;
pub mod formats;
pub mod runtime;

pub use error::{CliError, Result};
pub use formats::{
    fmt_f64, load_counts, read_matrix, read_report, read_samples, split_fingerprint,
    write_matrix, InputFormat, ReportDoc, RunMeta,
};
pub use runtime::{
    compare, evaluate_artifacts, predict_artifacts, run, split_to_dir, RunArtifacts, RunConfig,
};
