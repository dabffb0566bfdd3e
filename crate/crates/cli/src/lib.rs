//! Batch front end for moving-source reconstruction: run configuration,
//! artifact formats and the simulate / reconstruct / evaluate pipeline.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{resolve_scenario, RunConfig, ScenarioSelector, SCHEMA_VERSION};
pub use error::{CliError, Result};
pub use pipeline::{evaluate, reconstruct, simulate, Diagnostics, EvaluationReport, EvaluationRow};

/// Environment variable holding the log filter (`error`, `warn`, `info`,
/// `debug`, `trace`); defaults to `info`.
pub const LOG_ENV: &str = "WAVESRC_LOG";
