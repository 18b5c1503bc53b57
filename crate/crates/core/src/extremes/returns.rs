use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval_maps::{Interval, IntervalSet, OpenSystem};
use crate::ulam::{ball_frame, build_operator, MeasureOracle, SpectralSolution, Variant};

pub const DEFAULT_K_MAX: usize = 8;
/// Largest change of `r_{k,n}` between the two smallest radii for the
/// limit to be accepted.
pub const STABILITY_TOL: f64 = 1e-3;

/// First-return statistics of the target balls.
#[derive(Debug, Clone, Serialize)]
pub struct ReturnRatios {
    pub k_max: usize,
    pub radii: Vec<f64>,
    /// `r_kn[j][k]`: probability, given a start in the ball of radius
    /// `radii[j]`, of leaving at step 1 and first coming back at step `k + 1`.
    pub r_kn: Vec<Vec<f64>>,
    /// Operator-side `q_{k,n}`, which should equal `α^{k+1} r_{k,n}`.
    pub q_kn: Vec<Vec<f64>>,
    /// Values at the smallest radius.
    pub r_k: Vec<f64>,
    pub stable: bool,
    pub theta_ret: f64,
    /// Largest `|r_{k,n} - r_{k,n'}|` over the two smallest radii.
    pub stability: f64,
}

impl ReturnRatios {
    /// `max |q_{k,n} - α^{k+1} r_{k,n}|`.
    pub fn identity_residual(&self, alpha: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (rs, qs) in self.r_kn.iter().zip(&self.q_kn) {
            for (k, (r, q)) in rs.iter().zip(qs).enumerate() {
                worst = worst.max((q - alpha.powi(k as i32 + 1) * r).abs());
            }
        }
        worst
    }
}

/// `r_{k,n} = Λ(B ∩ T^{-1}B^c ∩ ... ∩ T^{-k}B^c ∩ T^{-(k+1)}B) / Λ(B)` for
/// `k = 0, ..., k_max`, by exact preimage algebra.
pub fn return_ratios_interval(
    sys: &OpenSystem,
    oracle: &MeasureOracle,
    ball: Interval,
    k_max: usize,
) -> Result<Vec<f64>> {
    let b = IntervalSet::from_interval(ball);
    let bc = b.complement();
    let mass = oracle.lambda_interval(ball);
    if !(mass > 0.0) {
        return Err(Error::InconsistentClassification {
            z: ball.midpoint(),
            radius: 0.5 * ball.len(),
        });
    }
    let mut v = b.clone();
    let mut out = Vec::with_capacity(k_max + 1);
    for _ in 0..=k_max {
        // v: first entry to B at exactly the current step, avoiding B before.
        let pre = sys.map().preimage_set(&v)?;
        out.push(oracle.lambda_set(&b.intersect(&pre)) / mass);
        v = bc.intersect(&pre);
    }
    Ok(out)
}

/// `q_{k,n} = <D(D(h0) M̃^k), g> / <D(h0), g>` with `D(p) = p M0 - p M̃`, on
/// a partition aligned with the ball when one exists.
pub fn return_ratios_operator(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    ball: Interval,
    k_max: usize,
) -> Result<Vec<f64>> {
    let frame = ball_frame(sys, sol, Some(ball), true);
    let open = build_operator(sys, &frame.partition, Variant::Open, None)?;
    let pert = build_operator(sys, &frame.partition, Variant::TargetPerturbed, Some(ball))?;
    let d = |p: &[f64]| -> Vec<f64> {
        let a = open.push_forward(p);
        let b = pert.push_forward(p);
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    };
    let pair = |p: &[f64]| -> f64 { p.iter().zip(&frame.dual).map(|(a, b)| a * b).sum() };
    let base = d(&frame.masses);
    let denom = pair(&base);
    if !(denom > 0.0) {
        return Err(Error::InconsistentClassification {
            z: ball.midpoint(),
            radius: 0.5 * ball.len(),
        });
    }
    let mut cur = base;
    let mut out = Vec::with_capacity(k_max + 1);
    for _ in 0..=k_max {
        out.push(pair(&d(&cur)) / denom);
        cur = pert.push_forward(&cur);
    }
    Ok(out)
}

/// Return ratios over decreasing radii. The ball may not contain a branch
/// boundary.
pub fn return_ratios(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    z: f64,
    k_max: usize,
    radii: &[f64],
) -> Result<ReturnRatios> {
    if radii.is_empty() {
        return Err(Error::InvalidInput("no radii".into()));
    }
    let oracle = MeasureOracle::new(sys, sol);
    let bounds = sys.map().interior_boundaries();
    let mut r_kn = Vec::with_capacity(radii.len());
    let mut q_kn = Vec::with_capacity(radii.len());
    for &r in radii {
        let ball = Interval::ball(z, r).ok_or(Error::Domain { name: "radius", value: r })?;
        if bounds.iter().any(|b| ball.lo < *b && *b < ball.hi) {
            return Err(Error::BallTooLarge { z, radius: r });
        }
        r_kn.push(return_ratios_interval(sys, &oracle, ball, k_max)?);
        q_kn.push(return_ratios_operator(sys, sol, ball, k_max)?);
    }
    // The smallest radius gives the limit.
    let smallest = radii
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let r_k = r_kn[smallest].clone();
    let stability = if radii.len() >= 2 {
        let second = radii
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != smallest)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        r_k.iter()
            .zip(&r_kn[second])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    Ok(ReturnRatios {
        k_max,
        radii: radii.to_vec(),
        theta_ret: 1.0 - r_k.iter().sum::<f64>(),
        stable: stability <= STABILITY_TOL,
        stability,
        r_k,
        r_kn,
        q_kn,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::interval_maps::PiecewiseExpandingMap;
    use crate::ulam::{build_partition, spectral_solution};

    #[test]
    fn period_two_returns() {
        let hole = IntervalSet::from_interval(Interval::new(0.0, 0.25).unwrap());
        let sys = OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).unwrap();
        let p = Arc::new(build_partition(&sys, 64, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        let radii = [1e-3, 3e-4, 1e-4];
        let rr = return_ratios(&sys, &sol, 1.0 / 3.0, 4, &radii).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((rr.r_k[1] - (2.0 - phi)).abs() < 1e-3, "{:?}", rr.r_k);
        for (k, r) in rr.r_k.iter().enumerate() {
            if k != 1 {
                assert!(r.abs() < 1e-9);
            }
        }
        assert!(rr.identity_residual(sol.alpha) < 1e-6);
        assert!(rr.stable);
        for rs in &rr.r_kn {
            assert!(rs.iter().sum::<f64>() <= 1.0 + 1e-12);
        }
    }
}
