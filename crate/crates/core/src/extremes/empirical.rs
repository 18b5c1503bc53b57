use rayon::prelude::*;
use serde::Serialize;

use super::levels::BoundaryLevels;
use crate::error::Result;
use crate::interval_maps::OpenSystem;
use crate::open_dynamics::{check_feasible, particle_rng, sample_nu, DensitySampler};
use crate::ulam::SpectralSolution;

/// Particles from `ν` that stayed in `X0` at times `0, ..., n-1`, each
/// reduced to the closest approach `min_{i<n} |T^i x - z|`.
#[derive(Debug, Clone)]
pub struct ConditionedEnsemble {
    pub n: usize,
    pub z: f64,
    pub n_particles: u64,
    pub seed: u64,
    /// Closest approaches of the survivors, in particle order.
    pub min_dist: Vec<f64>,
}

impl ConditionedEnsemble {
    pub fn survivors(&self) -> usize {
        self.min_dist.len()
    }

    /// `P̂(M_n ≤ u)` with its binomial standard error. `M_n ≤ u` iff every
    /// visit stays at distance at least `e^{-u}` (the open ball is missed).
    pub fn probability(&self, u: f64) -> EvdPoint {
        let r = (-u).exp();
        let s = self.min_dist.len();
        let hits = self.min_dist.iter().filter(|d| **d >= r).count();
        let p = hits as f64 / s as f64;
        EvdPoint {
            p,
            stderr: (p * (1.0 - p) / s as f64).sqrt(),
            survivors: s as u64,
            below: hits as u64,
        }
    }
}

/// One Monte Carlo point of the extreme value curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvdPoint {
    pub p: f64,
    pub stderr: f64,
    pub survivors: u64,
    pub below: u64,
}

/// `φ(x) = -log |x - z|`; `+∞` at `x = z`.
pub fn observable_phi(x: f64, z: f64) -> f64 {
    let d = (x - z).abs();
    if d == 0.0 {
        f64::INFINITY
    } else {
        -d.ln()
    }
}

/// Simulates the conditioned ensemble for one `n`. Requires the expected
/// survivor count `N α^{n-1}` to be at least 100.
pub fn conditioned_ensemble(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    z: f64,
    n: usize,
    n_particles: u64,
    seed: u64,
) -> Result<ConditionedEnsemble> {
    check_feasible(n_particles, sol.alpha, n.saturating_sub(1))?;
    let sampler = DensitySampler::nu(sol)?;
    let map = sys.map();
    let min_dist: Vec<f64> = (0..n_particles)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = particle_rng(seed, i);
            let mut x = sample_nu(sys, &sampler, &mut rng);
            let mut best = (x - z).abs();
            for _ in 1..n {
                x = map.evaluate(x);
                if sys.in_hole(x) {
                    return None;
                }
                best = best.min((x - z).abs());
            }
            Some(best)
        })
        .collect();
    Ok(ConditionedEnsemble {
        n,
        z,
        n_particles,
        seed,
        min_dist,
    })
}

/// Monte Carlo `P̂_n(M_n ≤ u_n)` for every level.
pub fn empirical_evd(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    levels: &BoundaryLevels,
    n_particles: u64,
    seed: u64,
) -> Result<Vec<EvdPoint>> {
    levels
        .pairs()
        .into_iter()
        .map(|(n, u)| {
            let ens = conditioned_ensemble(sys, sol, levels.z, n, n_particles, seed)?;
            Ok(ens.probability(u))
        })
        .collect()
}
