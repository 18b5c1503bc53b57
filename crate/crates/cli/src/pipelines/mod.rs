//! The file-emitting pipelines. Each one appends its files, warnings and
//! headline numbers to a [`Recorder`].

mod degenerate;
mod dimension;
mod evd;
mod spectral;
mod theta;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use openevt_core::interval_maps::{classify_target, OpenSystem, TargetSpec};
use openevt_core::ulam::{build_partition, spectral_solution, SpectralSolution};
use serde::Serialize;
use serde_json::{Map, Value};

pub use degenerate::run_degenerate;
pub use dimension::run_dimension;
pub use evd::{run_evd, EvdRun};
pub use spectral::run_spectral;
pub use theta::run_theta;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// Everything the pipelines share: the system, its spectral solution and
/// the classified target.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub sys: OpenSystem,
    pub sol: SpectralSolution,
    pub spec: TargetSpec,
    pub out_dir: PathBuf,
}

impl Context {
    pub fn new(cfg: ExperimentConfig, out_dir: PathBuf) -> CliResult<Self> {
        let sys = cfg.system()?;
        let spec = classify_target(
            &sys,
            cfg.z,
            cfg.p_max,
            cfg.options.classify_depth,
            cfg.options.classify_tol,
        )?;
        let partition = Arc::new(build_partition(&sys, cfg.bins, cfg.markov_mode)?);
        let sol = spectral_solution(&sys, &partition)?;
        Ok(Context {
            cfg,
            sys,
            sol,
            spec,
            out_dir,
        })
    }
}

/// A non-fatal finding, with the same fields as an error record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub code: String,
    pub module: String,
    pub parameter: String,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct Recorder {
    pub files: BTreeMap<String, Vec<String>>,
    pub warnings: Vec<Warning>,
    pub results: Map<String, Value>,
}

impl Recorder {
    pub fn file(&mut self, pipeline: &str, name: String) {
        self.files.entry(pipeline.to_string()).or_default().push(name);
    }

    pub fn warn(&mut self, code: &str, module: &str, parameter: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Warning {
            code: code.to_string(),
            module: module.to_string(),
            parameter: parameter.into(),
            message: message.into(),
        });
    }

    /// Records a failed optional step as a warning.
    pub fn warn_error(&mut self, e: &CliError) {
        let r = crate::error::ErrorRecord::from(e);
        self.warn(&r.name, &r.module, r.parameter, r.message);
    }

    pub fn result<T: Serialize>(&mut self, key: &str, value: T) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.results.insert(key.to_string(), v);
    }
}
