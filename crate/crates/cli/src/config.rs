use std::path::{Path, PathBuf};

use clap::ValueEnum;
use openevt_core::interval_maps::{
    Branch, Interval, IntervalSet, OpenSystem, PiecewiseExpandingMap, DEFAULT_N_CHECK, DEFAULT_PERIOD_TOL,
    DEFAULT_P_MAX,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// The map `T`. Only piecewise-affine maps can be written in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Doubling,
    Tent,
    /// Full increasing branches with the given slopes (their inverses sum to 1).
    LinearMarkov { slopes: Vec<f64> },
    /// Arbitrary affine branches `x ↦ slope·x + offset` on `[lo, hi)`.
    Affine { branches: Vec<AffineBranch> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineBranch {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub offset: f64,
}

impl MapSpec {
    pub fn build(&self) -> CliResult<PiecewiseExpandingMap> {
        Ok(match self {
            MapSpec::Doubling => PiecewiseExpandingMap::doubling(),
            MapSpec::Tent => PiecewiseExpandingMap::tent(),
            MapSpec::LinearMarkov { slopes } => PiecewiseExpandingMap::linear_markov(slopes)?,
            MapSpec::Affine { branches } => {
                let mut out = Vec::with_capacity(branches.len());
                for b in branches {
                    let domain = Interval::new(b.lo, b.hi).ok_or_else(|| {
                        CliError::Config(format!("empty branch domain [{}, {})", b.lo, b.hi))
                    })?;
                    out.push(Branch::affine(domain, b.slope, b.offset));
                }
                PiecewiseExpandingMap::new(out)?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Spectral,
    Evd,
    Theta,
    Dimension,
    Degenerate,
    #[default]
    All,
}

impl Pipeline {
    pub fn label(self) -> &'static str {
        match self {
            Pipeline::Spectral => "spectral",
            Pipeline::Evd => "evd",
            Pipeline::Theta => "theta",
            Pipeline::Dimension => "dimension",
            Pipeline::Degenerate => "degenerate",
            Pipeline::All => "all",
        }
    }
}

/// Knobs with working defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// Horizon of the Monte Carlo escape-rate fit.
    pub mc_horizon: usize,
    /// Block length `n` of the Gumbel fit for θ.
    pub gumbel_n: usize,
    /// Ball radii of the perturbed spectra.
    pub spectral_radii: Vec<f64>,
    /// Ball radii of the return ratios.
    pub return_radii: Vec<f64>,
    pub k_max: usize,
    pub survivor_depth: usize,
    /// Levels of the local-dimension sequence.
    pub dimension_u: Vec<f64>,
    /// Block lengths of the GEV fits.
    pub gev_n_values: Vec<usize>,
    /// Conditioned orbits per GEV block length.
    pub gev_paths: u64,
    pub classify_tol: f64,
    pub classify_depth: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            mc_horizon: 40,
            gumbel_n: 32,
            spectral_radii: (6..=12).map(|k| 2f64.powi(-k)).collect(),
            return_radii: vec![1e-3, 3e-4, 1e-4],
            k_max: 8,
            survivor_depth: 20,
            dimension_u: (2..=24).map(f64::from).collect(),
            gev_n_values: vec![256, 512, 1024],
            gev_paths: 50_000,
            classify_tol: DEFAULT_PERIOD_TOL,
            classify_depth: DEFAULT_N_CHECK,
        }
    }
}

fn default_d_const() -> f64 {
    1.01
}

fn default_p_max() -> usize {
    DEFAULT_P_MAX
}

/// One experiment. The seed is mandatory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: MapSpec,
    /// Hole as a list of `[lo, hi)` intervals. Empty for the closed system.
    pub hole: Vec<[f64; 2]>,
    pub z: f64,
    pub tau: Vec<f64>,
    pub n_values: Vec<usize>,
    pub bins: usize,
    pub markov_mode: bool,
    pub n_particles: u64,
    pub seed: u64,
    #[serde(default = "default_d_const")]
    pub d_const: f64,
    #[serde(default = "default_p_max")]
    pub p_max: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub pipeline: Pipeline,
    #[serde(default)]
    pub options: Options,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn hole_set(&self) -> CliResult<IntervalSet> {
        let mut pieces = Vec::with_capacity(self.hole.len());
        for [lo, hi] in &self.hole {
            pieces.push(Interval::new(*lo, *hi).ok_or_else(|| {
                CliError::Config(format!("empty hole interval [{lo}, {hi})"))
            })?);
        }
        Ok(IntervalSet::from_intervals(pieces))
    }

    pub fn system(&self) -> CliResult<OpenSystem> {
        let map = self.map.build()?;
        let hole = self.hole_set()?;
        if hole.is_empty() {
            Ok(OpenSystem::closed(map))
        } else {
            Ok(OpenSystem::new(map, hole)?)
        }
    }

    /// τ used for single-curve outputs: the only τ, or 1.
    pub fn curve_tau(&self) -> f64 {
        if self.tau.len() == 1 {
            self.tau[0]
        } else {
            1.0
        }
    }
}
