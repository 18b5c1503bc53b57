use std::num::NonZeroU32;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::sampling::{particle_rng, sample_nu, DensitySampler};
use crate::error::{Error, Result};
use crate::interval_maps::OpenSystem;
use crate::ulam::SpectralSolution;

/// Fewest survivors a time point needs to enter a fit.
pub const MIN_SURVIVORS: u64 = 100;

/// Orbit of one particle up to absorption or the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalPath {
    /// `x_0, x_1, ...`; ends with the first point in the hole, if any.
    pub positions: Vec<f64>,
    /// First `t` with `x_t` in the hole.
    pub exit_time: Option<usize>,
}

/// Iterates from `x0` until the orbit enters the hole or `horizon` steps
/// have been taken.
pub fn survival_simulate(sys: &OpenSystem, x0: f64, horizon: usize) -> Result<SurvivalPath> {
    if !(0.0..=1.0).contains(&x0) || sys.in_hole(x0) {
        return Err(Error::Domain { name: "x0", value: x0 });
    }
    let mut positions = Vec::with_capacity(horizon + 1);
    positions.push(x0);
    let mut x = x0;
    for t in 1..=horizon {
        x = sys.map().evaluate(x);
        positions.push(x);
        if sys.in_hole(x) {
            return Ok(SurvivalPath {
                positions,
                exit_time: Some(t),
            });
        }
    }
    Ok(SurvivalPath {
        positions,
        exit_time: None,
    })
}

fn exit_time(sys: &OpenSystem, mut x: f64, horizon: usize) -> Option<NonZeroU32> {
    for t in 1..=horizon {
        x = sys.map().evaluate(x);
        if sys.in_hole(x) {
            return NonZeroU32::new(t as u32);
        }
    }
    None
}

/// Particles started from `ν` and run until absorption.
#[derive(Debug, Clone, Serialize)]
pub struct SurvivalEnsemble {
    pub seed: u64,
    pub n_particles: u64,
    pub horizon: usize,
    /// `survivors[t]` = particles with `x_0, ..., x_t` all in `X0`.
    pub survivors: Vec<u64>,
    /// Per particle: exit time, `None` when it survived the horizon.
    #[serde(skip)]
    pub exit_times: Vec<Option<NonZeroU32>>,
}

impl SurvivalEnsemble {
    /// `histogram[t]` = particles with exit time `t` (index 0 unused).
    pub fn exit_histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.horizon + 1];
        for t in self.exit_times.iter().flatten() {
            h[t.get() as usize] += 1;
        }
        h
    }

    pub fn survived(&self) -> u64 {
        *self.survivors.last().unwrap_or(&0)
    }
}

/// Runs `n_particles` independent orbits from `ν`. Particle `i` draws from
/// its own stream, so the result does not depend on the worker count.
pub fn run_ensemble(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    n_particles: u64,
    horizon: usize,
    seed: u64,
) -> Result<SurvivalEnsemble> {
    let sampler = DensitySampler::nu(sol)?;
    let exit_times: Vec<Option<NonZeroU32>> = (0..n_particles)
        .into_par_iter()
        .map(|i| {
            let mut rng = particle_rng(seed, i);
            let x = sample_nu(sys, &sampler, &mut rng);
            exit_time(sys, x, horizon)
        })
        .collect();
    let mut exits = vec![0u64; horizon + 1];
    for t in exit_times.iter().flatten() {
        exits[t.get() as usize] += 1;
    }
    let mut survivors = Vec::with_capacity(horizon + 1);
    let mut alive = n_particles;
    survivors.push(alive);
    for e in &exits[1..] {
        alive -= e;
        survivors.push(alive);
    }
    Ok(SurvivalEnsemble {
        seed,
        n_particles,
        horizon,
        survivors,
        exit_times,
    })
}

/// Monte Carlo escape factor with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlphaEstimate {
    pub alpha_hat: f64,
    pub stderr: f64,
    pub usable_times: usize,
}

/// Least-squares slope of `log(S_t / N)` against `t` over the times with
/// at least [`MIN_SURVIVORS`] survivors. The standard error accounts for
/// the nesting of the survivor events: `Cov(log f_s, log f_t) =
/// (1 / P_s - 1) / N` for `s ≤ t`.
pub fn alpha_from_ensemble(ens: &SurvivalEnsemble) -> Result<AlphaEstimate> {
    let n = ens.n_particles as f64;
    let pts: Vec<(f64, f64)> = ens
        .survivors
        .iter()
        .enumerate()
        .filter(|(_, s)| **s >= MIN_SURVIVORS)
        .map(|(t, s)| (t as f64, *s as f64 / n))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSurvivors { usable: pts.len() });
    }
    let m = pts.len() as f64;
    let tbar = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tbar).powi(2)).sum();
    let c: Vec<f64> = pts.iter().map(|p| (p.0 - tbar) / sxx).collect();
    let slope: f64 = c.iter().zip(&pts).map(|(ci, p)| ci * p.1.ln()).sum();
    let mut var = 0.0;
    for (a, pa) in pts.iter().enumerate() {
        for (b, pb) in pts.iter().enumerate() {
            let earlier = if pa.0 <= pb.0 { pa.1 } else { pb.1 };
            var += c[a] * c[b] * (1.0 / earlier - 1.0) / n;
        }
    }
    let alpha_hat = slope.exp();
    Ok(AlphaEstimate {
        alpha_hat,
        stderr: alpha_hat * var.max(0.0).sqrt(),
        usable_times: pts.len(),
    })
}

pub fn estimate_alpha_mc(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    n_particles: u64,
    horizon: usize,
    seed: u64,
) -> Result<AlphaEstimate> {
    if n_particles < 1000 {
        return Err(Error::Domain {
            name: "n_particles",
            value: n_particles as f64,
        });
    }
    alpha_from_ensemble(&run_ensemble(sys, sol, n_particles, horizon, seed)?)
}

/// Chi-squared goodness of fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Compares exit times with the geometric law `P(exit = t) = α^{t-1}(1-α)`
/// (plus survival past the horizon). Cells with expected count below 5 are
/// pooled into the tail.
pub fn geometric_survival_test(ens: &SurvivalEnsemble, alpha: f64) -> Result<GofResult> {
    let n = ens.n_particles as f64;
    let hist = ens.exit_histogram();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut tail_obs = ens.survived() as f64;
    let mut tail_exp = n * alpha.powi(ens.horizon as i32);
    let mut pending = (0.0, 0.0);
    for t in 1..=ens.horizon {
        let exp = n * alpha.powi(t as i32 - 1) * (1.0 - alpha);
        pending.0 += hist[t] as f64;
        pending.1 += exp;
        if pending.1 >= 5.0 {
            cells.push(pending);
            pending = (0.0, 0.0);
        }
    }
    tail_obs += pending.0;
    tail_exp += pending.1;
    if tail_exp >= 5.0 || cells.is_empty() {
        cells.push((tail_obs, tail_exp));
    } else {
        let last = cells.last_mut().unwrap();
        last.0 += tail_obs;
        last.1 += tail_exp;
    }
    if cells.len() < 2 {
        return Err(Error::InsufficientSurvivors { usable: cells.len() });
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidInput(format!("chi-squared: {e}")))?;
    Ok(GofResult {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}

/// Expected survivors of a run conditioned on `horizon` steps must be at
/// least [`MIN_SURVIVORS`]: `N α^{horizon} ≥ 100`.
pub fn check_feasible(n_particles: u64, alpha: f64, horizon: usize) -> Result<()> {
    let expected = n_particles as f64 * alpha.powi(horizon as i32);
    if expected < MIN_SURVIVORS as f64 {
        return Err(Error::InfeasibleHorizon {
            horizon,
            expected,
            required: MIN_SURVIVORS as usize,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::interval_maps::{Interval, IntervalSet, PiecewiseExpandingMap};
    use crate::ulam::{build_partition, spectral_solution, spectral_solution_with_tol};

    fn system(lo: f64, hi: f64) -> OpenSystem {
        let hole = IntervalSet::from_interval(Interval::new(lo, hi).unwrap());
        OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).unwrap()
    }

    #[test]
    fn simulate_examples() {
        let sys = system(0.0, 0.25);
        // A float loses one binary digit per doubling, so the period-2 orbit
        // of 1/3 is only followed faithfully for about 50 steps.
        assert_eq!(survival_simulate(&sys, 1.0 / 3.0, 50).unwrap().exit_time, None);
        // 0.9 = 0.1110011..., the first "00" starts at digit 4.
        assert_eq!(survival_simulate(&sys, 0.9, 50).unwrap().exit_time, Some(3));
        assert_eq!(survival_simulate(&sys, 0.55, 50).unwrap().exit_time, Some(1));
        assert!(survival_simulate(&sys, 0.1, 5).is_err());
    }

    #[test]
    fn half_hole_alpha() {
        let sys = system(0.5, 0.75);
        let p = Arc::new(build_partition(&sys, 4, true).unwrap());
        let sol = spectral_solution_with_tol(&sys, &p, 1e-9).unwrap();
        assert!((sol.alpha - 0.5).abs() < 1e-3, "{}", sol.alpha);
        let est = estimate_alpha_mc(&sys, &sol, 200_000, 12, 11).unwrap();
        assert!((est.alpha_hat - 0.5).abs() < 4.0 * est.stderr + 1e-3, "{est:?}");
    }

    #[test]
    fn golden_mean_geometric_exits() {
        let sys = system(0.0, 0.25);
        let p = Arc::new(build_partition(&sys, 4, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        let ens = run_ensemble(&sys, &sol, 100_000, 30, 5).unwrap();
        for w in ens.survivors.windows(2) {
            assert!(w[1] <= w[0]);
        }
        let g = geometric_survival_test(&ens, sol.alpha).unwrap();
        assert!(g.p_value > 1e-3, "{g:?}");
    }

    #[test]
    fn feasibility_bound() {
        assert!(check_feasible(1_000_000, 0.8, 40).is_ok());
        assert!(matches!(
            check_feasible(1_000, 0.5, 20),
            Err(Error::InfeasibleHorizon { .. })
        ));
    }
}
