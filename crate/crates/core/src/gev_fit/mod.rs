//! Block maxima, GEV fits and the local dimension of `Λ`.

mod dimension;
mod lmoments;

pub use dimension::{local_dimension, DimensionEstimate, ATOM_THRESHOLD};
pub use lmoments::{
    block_maxima, fit_gev, normalizing_sequences, sample_lmoments, GevFit, NormalizingSequences,
    MIN_BLOCK_LEN, MIN_MAXIMA, SHAPE_FLAG,
};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval_maps::OpenSystem;
use crate::open_dynamics::{check_feasible, particle_rng, sample_nu, DensitySampler};
use crate::ulam::SpectralSolution;

/// Orbits `x_0, ..., x_{len-1}` of `ν`-distributed particles that stay in
/// `X0` throughout, in particle order.
pub fn conditioned_trajectories(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    len: usize,
    n_particles: u64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_feasible(n_particles, sol.alpha, len.saturating_sub(1))?;
    let sampler = DensitySampler::nu(sol)?;
    let map = sys.map();
    Ok((0..n_particles)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = particle_rng(seed, i);
            let mut x = sample_nu(sys, &sampler, &mut rng);
            let mut path = Vec::with_capacity(len);
            path.push(x);
            for _ in 1..len {
                x = map.evaluate(x);
                if sys.in_hole(x) {
                    return None;
                }
                path.push(x);
            }
            Some(path)
        })
        .collect())
}

/// Conditioned orbits of length `len`, drawn backwards. Given survival,
/// `x_{len-1}` has law `ν` on `X0` and each earlier point is a preimage `y`
/// in `X0` of its successor, chosen with weight `h0(y) / |T'(y)|`. Inverse
/// branches contract, so long orbits keep full precision; forward float
/// orbits of an expanding map lose about `log2 β` bits per step.
pub fn reverse_conditioned_trajectories(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    len: usize,
    n_paths: u64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if len == 0 {
        return Err(Error::Domain { name: "len", value: 0.0 });
    }
    let sampler = DensitySampler::nu(sol)?;
    let map = sys.map();
    let partition = &sol.partition;
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = particle_rng(seed, i);
            let mut pre: Vec<(f64, f64)> = Vec::with_capacity(map.branches().len());
            'path: for _ in 0..MAX_RESTARTS {
                let mut path = vec![0.0; len];
                let mut x = sample_nu(sys, &sampler, &mut rng);
                path[len - 1] = x;
                for k in (0..len - 1).rev() {
                    pre.clear();
                    for b in map.branches() {
                        if let Some(y) = b.inverse_point(x)? {
                            if !sys.in_hole(y) {
                                pre.push((y, sol.h0[partition.locate(y)] / b.derivative(y).abs()));
                            }
                        }
                    }
                    let total: f64 = pre.iter().map(|p| p.1).sum();
                    if pre.is_empty() || !(total > 0.0) {
                        continue 'path;
                    }
                    let mut u = rng.random::<f64>() * total;
                    x = pre[pre.len() - 1].0;
                    for (y, w) in &pre {
                        if u < *w {
                            x = *y;
                            break;
                        }
                        u -= w;
                    }
                    path[k] = x;
                }
                return Ok(path);
            }
            Err(Error::InsufficientData {
                reason: "reverse orbit repeatedly left the support of h0".into(),
            })
        })
        .collect()
}

const MAX_RESTARTS: usize = 1000;

/// GEV fit of the block maxima for each block length `n`, from `n_paths`
/// reverse-sampled conditioned orbits per `n`.
pub fn gev_by_block_length(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    z: f64,
    n_values: &[usize],
    n_paths: u64,
    seed: u64,
) -> Result<Vec<GevFit>> {
    n_values
        .iter()
        .map(|n| {
            let paths = reverse_conditioned_trajectories(sys, sol, *n, n_paths, seed ^ (*n as u64))?;
            fit_gev(&block_maxima(&paths, z, *n)?)
        })
        .collect()
}

#[cfg(test)]
mod tests;
