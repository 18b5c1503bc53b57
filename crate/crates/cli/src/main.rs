use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use openevt_cli::{run, validate, ErrorRecord, ExperimentConfig, Pipeline, Severity};

#[derive(Parser)]
#[command(name = "openevt", version, about = "Extreme value statistics for open interval maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured pipeline(s) and write CSV files plus manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        pipeline: Option<Pipeline>,
        #[arg(long, env = "OPENEVT_WORKERS", default_value_t = 1)]
        workers: usize,
    },
    /// Check a config and print one JSON diagnostic per line.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, pipeline, workers } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&ErrorRecord::from(&e)),
            };
            match run(cfg, &out, pipeline, workers) {
                Ok(m) => {
                    for w in &m.warnings {
                        eprintln!("warning [{}] {}: {}", w.code, w.parameter, w.message);
                    }
                    match &m.error {
                        None => {
                            println!("{}", out.join(openevt_cli::run::MANIFEST).display());
                            ExitCode::SUCCESS
                        }
                        Some(e) => fail(e),
                    }
                }
                Err(e) => fail(&ErrorRecord::from(&e)),
            }
        }
        Command::Validate { config } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&ErrorRecord::from(&e)),
            };
            let diags = validate(&cfg);
            for d in &diags {
                println!("{}", serde_json::to_string(d).expect("diagnostic serializes"));
            }
            if diags.iter().any(|d| d.severity == Severity::Fatal) {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}

fn fail(e: &ErrorRecord) -> ExitCode {
    eprintln!("{}", serde_json::to_string(e).expect("error record serializes"));
    ExitCode::FAILURE
}
