//! Config-driven runner for the `openevt-core` pipelines. A run reads one
//! JSON config, writes plot-ready CSV files and a `manifest.json`.

pub mod config;
pub mod error;
pub mod output;
pub mod pipelines;
pub mod run;
pub mod validate;

pub use config::{ExperimentConfig, Pipeline};
pub use error::{CliError, CliResult, ErrorRecord};
pub use run::{run, RunManifest};
pub use validate::{validate, Diagnostic, Severity};
