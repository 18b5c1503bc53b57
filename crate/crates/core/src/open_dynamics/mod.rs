//! Trajectory-level Monte Carlo for the open system.
//!
//! Orbits start from the conditionally invariant measure `ν` and stop at
//! the first entry into the hole.

mod ensemble;
mod sampling;

pub use ensemble::{
    alpha_from_ensemble, check_feasible, estimate_alpha_mc, geometric_survival_test, run_ensemble,
    survival_simulate, AlphaEstimate, GofResult, SurvivalEnsemble, SurvivalPath, MIN_SURVIVORS,
};
pub use sampling::{particle_rng, sample_from_density, DensitySampler};
pub(crate) use sampling::sample_nu;

use crate::error::{Error, Result};
use crate::interval_maps::{IntervalSet, OpenSystem};
use crate::ulam::{MeasureOracle, SpectralSolution};

/// `η = -log α`.
pub fn escape_rate(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
        });
    }
    Ok(-alpha.ln())
}

/// Largest relative residual of `ν(T^{-n} A ∩ X_n) = ν(A) ν(X_n)` over the
/// test sets, with both sides computed by exact interval algebra.
pub fn check_conditional_invariance(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    test_sets: &[IntervalSet],
    n: usize,
) -> Result<f64> {
    let oracle = MeasureOracle::new(sys, sol);
    let xn = sys.survivor_approx(n)?;
    let nu_xn = oracle.nu_set(&xn);
    let mut worst: f64 = 0.0;
    for a in test_sets {
        let mut pre = a.clone();
        for _ in 0..n {
            pre = sys.map().preimage_set(&pre)?;
        }
        let lhs = oracle.nu_set(&pre.intersect(&xn));
        let rhs = oracle.nu_set(a) * nu_xn;
        let diff = (lhs - rhs).abs();
        worst = worst.max(if rhs > 0.0 { diff / rhs } else { diff });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::interval_maps::{Interval, PiecewiseExpandingMap};
    use crate::ulam::{build_partition, spectral_solution};

    #[test]
    fn escape_rate_values() {
        assert_eq!(escape_rate(1.0).unwrap(), 0.0);
        let alpha = (1.0 + 5f64.sqrt()) / 4.0;
        let phi = 2.0 * alpha;
        assert!((escape_rate(alpha).unwrap() - (2f64.ln() - phi.ln())).abs() < 1e-15);
        assert!((escape_rate(0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(escape_rate(0.0).is_err());
    }

    #[test]
    fn golden_mean_conditional_invariance() {
        let hole = IntervalSet::from_interval(Interval::new(0.0, 0.25).unwrap());
        let sys = OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).unwrap();
        let p = Arc::new(build_partition(&sys, 4, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        let sets = vec![
            sys.x0().clone(),
            IntervalSet::from_interval(Interval::new(0.25, 0.5).unwrap()),
            IntervalSet::from_interval(Interval::new(0.05, 0.2).unwrap()),
        ];
        assert!(check_conditional_invariance(&sys, &sol, &sets, 5).unwrap() < 1e-8);
    }
}
