//! Extreme value statistics of `φ(x) = -log |x - z|` along open orbits.
//!
//! The target classification picks the law: Gumbel with extremal index
//! `θ < 1` at periodic points, `θ = 1` at other survivor points, and a
//! degenerate limit off the survivor set.

mod degenerate;
mod empirical;
mod levels;
mod returns;
mod theta;

pub use degenerate::{
    degenerate_probe, distance_estimate, DegenerateProbe, DistanceEstimate, DEFAULT_SURVIVOR_DEPTH,
};
pub use empirical::{
    conditioned_ensemble, empirical_evd, observable_phi, ConditionedEnsemble, EvdPoint,
};
pub use levels::{boundary_levels, radius_for_mass, BoundaryLevels};
pub use returns::{
    return_ratios, return_ratios_interval, return_ratios_operator, ReturnRatios, DEFAULT_K_MAX,
    STABILITY_TOL,
};
pub use theta::{
    theta_formula, theta_gumbel, theta_spectral, Estimate, GumbelFit, ThetaEstimates,
};

use crate::ulam::SpectralSolution;

/// Largest relative jump of `h0` between the bin holding `z` and its
/// neighbours. Bin data cannot prove continuity of `h0` at `z`; this is
/// reported for inspection only.
pub fn h0_oscillation(sol: &SpectralSolution, z: f64) -> f64 {
    let i = sol.partition.locate(z);
    let h = sol.h0[i];
    let lo = i.saturating_sub(1);
    let hi = (i + 1).min(sol.h0.len() - 1);
    let jump = (lo..=hi).map(|j| (sol.h0[j] - h).abs()).fold(0.0, f64::max);
    if h > 0.0 {
        jump / h
    } else {
        jump
    }
}
