//! Batch experiment driver.
//!
//! An [`ExperimentSpec`] names an experiment, carries the system
//! configuration and optional sweep axes, and says where the result table
//! goes. [`run_experiment`] evaluates it and writes one CSV or JSON file.
//! Every result is a pure function of the spec: sweep points run in
//! parallel but each draws from a seed derived from its position, and rows
//! come out sorted by sweep value.

mod experiments;
mod spec;
mod table;

pub use experiments::{evaluate, papr_curves, Outcome, PaprCurve, EQUIVALENCE_TOLERANCE, PAPR_PROBABILITY};
pub use spec::{load_config, with_param, Experiment, ExperimentSpec, Format, SweepAxis, DEFAULT_CCDF_SAMPLES};
pub use table::{Cell, Table};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cohtx::Error),

    #[error("invalid `{field}`: {reason}")]
    Spec { field: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn spec(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Spec {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 1 for a bad configuration or spec, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(_) | CliError::Spec { .. } => 1,
            CliError::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Runs `spec`, writes its result file and returns the outcome. Invariant
/// failures do not abort the run; they are listed in the outcome and the
/// file is still written.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    let outcome = evaluate(spec)?;
    let text = match spec.format {
        Format::Csv => outcome.table.to_csv(&spec.header()?),
        Format::Json => outcome.table.to_json(&spec.header()?, &outcome.failures),
    };
    std::fs::write(&spec.output_path, text).map_err(|source| CliError::Io {
        path: spec.output_path.clone(),
        source,
    })?;
    Ok(outcome)
}
