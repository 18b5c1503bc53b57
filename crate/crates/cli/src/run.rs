use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{ExperimentConfig, Pipeline};
use crate::error::{CliError, CliResult, ErrorRecord};
use crate::pipelines::{
    run_degenerate, run_dimension, run_evd, run_spectral, run_theta, Context, Recorder, Warning,
};
use crate::validate::{static_checks, Severity};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub pipeline: &'static str,
    pub classification: Option<String>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    /// Output files relative to the output directory, per pipeline.
    pub files: std::collections::BTreeMap<String, Vec<String>>,
    pub warnings: Vec<Warning>,
    pub results: Map<String, Value>,
    pub error: Option<ErrorRecord>,
    pub status: &'static str,
}

impl RunManifest {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Pipelines that `all` runs for a target, in order.
pub fn applicable(on_survivor: bool) -> &'static [Pipeline] {
    if on_survivor {
        &[Pipeline::Spectral, Pipeline::Evd, Pipeline::Theta, Pipeline::Dimension]
    } else {
        &[Pipeline::Spectral, Pipeline::Evd, Pipeline::Degenerate]
    }
}

/// Runs the selected pipeline(s) and writes `manifest.json` to `out_dir`,
/// also on failure. The returned manifest carries the error record, if any.
pub fn run(cfg: ExperimentConfig, out_dir: &Path, pipeline: Option<Pipeline>, workers: usize) -> CliResult<RunManifest> {
    let pipeline = pipeline.unwrap_or(cfg.pipeline);
    std::fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let start = Instant::now();
    let mut rec = Recorder::default();
    let mut classification = None;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let outcome = pool.install(|| execute(&cfg, out_dir, pipeline, &mut rec, &mut classification));
    let error = outcome.err().map(|e| ErrorRecord::from(&e));
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg,
        pipeline: pipeline.label(),
        classification,
        workers: workers.max(1),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        files: rec.files,
        warnings: rec.warnings,
        results: rec.results,
        status: if error.is_some() { "error" } else { "ok" },
        error,
    };
    let path = out_dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
    Ok(manifest)
}

fn execute(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    pipeline: Pipeline,
    rec: &mut Recorder,
    classification: &mut Option<String>,
) -> CliResult<()> {
    if let Some(d) = static_checks(cfg).into_iter().find(|d| d.severity == Severity::Fatal) {
        return Err(CliError::Config(format!("{}: {}", d.parameter, d.message)));
    }
    let ctx = Context::new(cfg.clone(), PathBuf::from(out_dir))?;
    *classification = Some(ctx.spec.class.label().to_string());
    let on_survivor = ctx.spec.class.on_survivor();
    let steps: Vec<Pipeline> = match pipeline {
        Pipeline::All => applicable(on_survivor).to_vec(),
        p => vec![p],
    };
    let only = steps.len() == 1;
    for step in steps {
        match step {
            Pipeline::Spectral => run_spectral(&ctx, rec)?,
            Pipeline::Evd => {
                run_evd(&ctx, rec)?;
            }
            Pipeline::Theta => match run_theta(&ctx, rec) {
                Ok(_) => {}
                Err(e @ CliError::Refused { .. }) if !only => {
                    rec.warn_error(&e);
                }
                Err(e) => return Err(e),
            },
            Pipeline::Dimension => run_dimension(&ctx, rec)?,
            Pipeline::Degenerate => {
                run_degenerate(&ctx, rec)?;
            }
            Pipeline::All => unreachable!("expanded above"),
        }
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}
