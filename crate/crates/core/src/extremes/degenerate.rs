use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval_maps::{OpenSystem, TargetClass, TargetSpec};
use crate::ulam::{evd_operator_curve, perturbed_eigenvalue_curve, SpectralSolution};

/// Depth of the survivor approximation used for the distance to `X_∞`.
pub const DEFAULT_SURVIVOR_DEPTH: usize = 20;

/// Extreme value law at a target off the survivor set, with `u_n = log n`
/// (ball radius `1/n`).
#[derive(Debug, Clone, Serialize)]
pub struct DegenerateProbe {
    pub z: f64,
    pub depth: usize,
    /// `dist(z, X_depth)`.
    pub exact_distance: f64,
    /// First `n` whose ball misses `X_depth`.
    pub n_hat: Option<usize>,
    pub alpha: f64,
    pub n_values: Vec<usize>,
    pub lambda_n: Vec<f64>,
    /// Operator value of `P(M_n ≤ log n)`.
    pub curve: Vec<f64>,
}

impl DegenerateProbe {
    /// `1 / n̂`, the distance estimate.
    pub fn distance_estimate(&self) -> Option<f64> {
        self.n_hat.map(|n| 1.0 / n as f64)
    }
}

pub fn degenerate_probe(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    spec: &TargetSpec,
    n_values: &[usize],
    depth: usize,
) -> Result<DegenerateProbe> {
    if spec.class != TargetClass::OffSurvivor {
        return Err(Error::ClassificationMismatch {
            expected: "off_survivor",
            found: spec.class.label(),
        });
    }
    let z = spec.z;
    let xd = sys.survivor_approx(depth)?;
    let exact_distance = xd.distance(z);
    let n_hat = if exact_distance > 0.0 && !xd.is_empty() {
        let mut n = (1.0 / exact_distance).ceil().max(1.0) as usize;
        while !xd.disjoint_from_open(z - 1.0 / n as f64, z + 1.0 / n as f64) {
            n += 1;
        }
        Some(n)
    } else {
        None
    };
    if n_values.contains(&0) {
        return Err(Error::Domain { name: "n", value: 0.0 });
    }
    let radii: Vec<f64> = n_values.iter().map(|n| 1.0 / *n as f64).collect();
    // The base partition keeps every bin that the ball cuts free of
    // conformal mass, so λ_n = α holds exactly once the ball misses X_∞.
    let spectrum = perturbed_eigenvalue_curve(sys, sol, z, &radii, false, false)?;
    let levels: Vec<(usize, f64)> = n_values.iter().map(|n| (*n, (*n as f64).ln())).collect();
    let curve = evd_operator_curve(sys, sol, z, &levels)?;
    Ok(DegenerateProbe {
        z,
        depth,
        exact_distance,
        n_hat,
        alpha: sol.alpha,
        n_values: n_values.to_vec(),
        lambda_n: spectrum.lambda_n,
        curve,
    })
}

/// `1/n̂` next to the exact distance to the survivor approximation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistanceEstimate {
    pub estimate: Option<f64>,
    pub exact: f64,
    pub n_hat: Option<usize>,
}

pub fn distance_estimate(probe: &DegenerateProbe) -> DistanceEstimate {
    DistanceEstimate {
        estimate: probe.distance_estimate(),
        exact: probe.exact_distance,
        n_hat: probe.n_hat,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::interval_maps::{classify_target, Interval, IntervalSet, PiecewiseExpandingMap};
    use crate::ulam::{build_partition, spectral_solution};

    #[test]
    fn point_inside_the_hole() {
        let hole = IntervalSet::from_interval(Interval::new(0.0, 0.25).unwrap());
        let sys = OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).unwrap();
        let p = Arc::new(build_partition(&sys, 1 << 10, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        let spec = classify_target(&sys, 0.1, 16, 64, 1e-9).unwrap();
        let probe = degenerate_probe(&sys, &sol, &spec, &[2, 5, 10, 50, 100], 20).unwrap();
        // The survivor set starts at 1/3.
        assert!((probe.exact_distance - (1.0 / 3.0 - 0.1)).abs() < 1e-5);
        assert_eq!(probe.n_hat, Some(5));
        for (n, (l, c)) in probe.n_values.iter().zip(probe.lambda_n.iter().zip(&probe.curve)) {
            if *n >= 5 {
                assert_eq!(l.to_bits(), sol.alpha.to_bits(), "n = {n}");
            }
            if *n >= 50 {
                assert!(*c >= 0.99, "n = {n}: {c}");
            }
        }
        let on = classify_target(&sys, 1.0 / 3.0, 16, 64, 1e-9).unwrap();
        assert!(matches!(
            degenerate_probe(&sys, &sol, &on, &[5], 20),
            Err(Error::ClassificationMismatch { .. })
        ));
    }
}
