use serde::Serialize;

use crate::error::{Error, Result};
use crate::ulam::BallMass;

/// Smallest radius probed when checking that `z` carries mass.
const SUPPORT_PROBE_RADIUS: f64 = 1e-12;

/// Levels `u_n` with `Λ(B(z, e^{-u_n})) = τ / n`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryLevels {
    pub z: f64,
    pub tau: f64,
    pub n_values: Vec<usize>,
    pub u_values: Vec<f64>,
    pub radii: Vec<f64>,
}

impl BoundaryLevels {
    /// `(n, u_n)` pairs.
    pub fn pairs(&self) -> Vec<(usize, f64)> {
        self.n_values.iter().copied().zip(self.u_values.iter().copied()).collect()
    }
}

/// Radius `r` with `mass(B(z, r)) = target`, by bisection in `log r`.
pub fn radius_for_mass<M: BallMass + ?Sized>(mass: &M, z: f64, target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::Domain {
            name: "tau / n",
            value: target,
        });
    }
    let full = mass.ball_mass(z, 1.0);
    if full < target {
        return Err(Error::OffSupport { z, radius: 1.0 });
    }
    let (mut lo, mut hi) = (f64::MIN_POSITIVE.ln(), 0.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass.ball_mass(z, mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(hi.exp())
}

/// Boundary levels for each `n`. Errors with `OffSupport` when `z` has no
/// mass nearby (the degenerate case).
pub fn boundary_levels<M: BallMass + Sync + ?Sized>(
    mass: &M,
    z: f64,
    tau: f64,
    n_values: &[usize],
) -> Result<BoundaryLevels> {
    if !(tau > 0.0) {
        return Err(Error::Domain { name: "tau", value: tau });
    }
    if mass.ball_mass(z, SUPPORT_PROBE_RADIUS) <= 0.0 {
        return Err(Error::OffSupport {
            z,
            radius: SUPPORT_PROBE_RADIUS,
        });
    }
    let mut radii = Vec::with_capacity(n_values.len());
    for &n in n_values {
        if n == 0 {
            return Err(Error::Domain { name: "n", value: 0.0 });
        }
        radii.push(radius_for_mass(mass, z, tau / n as f64)?);
    }
    Ok(BoundaryLevels {
        z,
        tau,
        n_values: n_values.to_vec(),
        u_values: radii.iter().map(|r| -r.ln()).collect(),
        radii,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::Interval;

    struct Lebesgue;
    impl BallMass for Lebesgue {
        fn ball_mass(&self, z: f64, r: f64) -> f64 {
            Interval::ball(z, r).map_or(0.0, |b| b.len())
        }
    }

    #[test]
    fn lebesgue_levels() {
        let l = boundary_levels(&Lebesgue, 0.5, 1.0, &[4, 10, 100]).unwrap();
        for (n, u) in l.pairs() {
            assert!((u - (2.0 * n as f64).ln()).abs() < 1e-9, "{n}: {u}");
        }
    }

    #[test]
    fn off_support() {
        struct Null;
        impl BallMass for Null {
            fn ball_mass(&self, _: f64, _: f64) -> f64 {
                0.0
            }
        }
        assert!(matches!(
            boundary_levels(&Null, 0.5, 1.0, &[4]),
            Err(Error::OffSupport { .. })
        ));
    }
}
