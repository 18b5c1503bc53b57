use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::eigen::{leading_eigs_from, EIG_MAX_ITER, EIG_TOL};
use super::measure::MeasureOracle;
use super::operator::{build_operator, Variant};
use super::partition::BinPartition;
use super::spectral::SpectralSolution;
use crate::error::{Error, Result};
use crate::interval_maps::{Interval, OpenSystem};

/// Most breakpoints a ball-aligned refinement may add.
pub const ALIGN_CAP: usize = 200_000;

/// Bin masses and dual densities of `sol` carried over to a partition whose
/// breakpoints include the ball edges, when such a Markov refinement
/// exists. Otherwise the base partition is used and a bin cut by the ball
/// loses the covered fraction of its mass.
pub(crate) struct BallFrame {
    pub partition: Arc<BinPartition>,
    pub masses: Vec<f64>,
    pub dual: Vec<f64>,
    pub aligned: bool,
}

pub(crate) fn ball_frame(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    ball: Option<Interval>,
    align: bool,
) -> BallFrame {
    let base = || BallFrame {
        partition: Arc::clone(&sol.partition),
        masses: sol.masses().to_vec(),
        dual: sol.dual().to_vec(),
        aligned: false,
    };
    let Some(b) = ball else { return base() };
    if !align || !sol.exact {
        return base();
    }
    let Some(fine) = sol.partition.refine_with(sys.map(), &[b.lo, b.hi], ALIGN_CAP) else {
        return base();
    };
    // h0 is constant on the Markov bins, so masses split by width; the dual
    // measure is singular and is resolved by the oracle instead.
    let oracle = MeasureOracle::new(sys, sol);
    let mut masses = Vec::with_capacity(fine.len());
    let mut dual = Vec::with_capacity(fine.len());
    for i in 0..fine.len() {
        let bin = fine.bin(i);
        let parent = sol.partition.locate(bin.midpoint());
        masses.push(sol.masses()[parent] * fine.width(i) / sol.partition.width(parent));
        dual.push(oracle.mu0_interval(bin) / bin.len());
    }
    BallFrame {
        partition: Arc::new(fine),
        masses,
        dual,
        aligned: true,
    }
}

/// `P(M_n ≤ u_n) = α^{-(n-1)} ∫ L̃_n^n h0 dm` for each `(n, u_n)`, where `L̃_n`
/// removes `X0 ∖ B(z, e^{-u_n})`. Each step is rescaled by `α`.
pub fn evd_operator_curve(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    z: f64,
    levels: &[(usize, f64)],
) -> Result<Vec<f64>> {
    levels
        .par_iter()
        .map(|&(n, u)| {
            if n == 0 {
                return Err(Error::InvalidInput("n must be positive".into()));
            }
            let ball = Interval::ball(z, (-u).exp());
            let frame = ball_frame(sys, sol, ball, true);
            let op = build_operator(sys, &frame.partition, Variant::TargetPerturbed, ball)?;
            let mut p = frame.masses;
            // h0 is the left eigenvector normalized so that its X0 part is one.
            let scale: f64 = p
                .iter()
                .zip(sol_fraction(sys, &frame.partition)?.iter())
                .map(|(a, f)| a * f)
                .sum();
            p.iter_mut().for_each(|v| *v /= scale);
            for _ in 0..n {
                p = op.push_forward(&p);
                p.iter_mut().for_each(|v| *v /= sol.alpha);
            }
            Ok(sol.alpha * p.iter().sum::<f64>())
        })
        .collect()
}

fn sol_fraction(sys: &OpenSystem, partition: &Arc<BinPartition>) -> Result<Vec<f64>> {
    let x0 = sys.x0();
    Ok((0..partition.len())
        .map(|i| {
            let b = partition.bin(i);
            x0.intersect_interval(&b).measure() / b.len()
        })
        .collect())
}

/// Leading eigenvalues of the target-perturbed operators.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbedSpectrum {
    pub radii: Vec<f64>,
    pub lambda_n: Vec<f64>,
    /// `α Λ(B_n)`.
    pub delta_n: Vec<f64>,
    /// `(α - λ_n) / Δ_n`; NaN where `Δ_n = 0`.
    pub slope_estimates: Vec<f64>,
    /// Whether the partition was refined to contain the ball edges.
    pub aligned: Vec<bool>,
}

/// `λ_n` for balls of the given radii around `z`. `on_survivor` states the
/// target classification; a null ball is then an error.
///
/// With `align` the operator is built on a Markov refinement containing the
/// ball edges (exact for affine Markov maps). Without it the base partition
/// is used, which keeps `λ_n = α` bit for bit when every cut bin carries no
/// conformal mass.
pub fn perturbed_eigenvalue_curve(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    z: f64,
    radii: &[f64],
    on_survivor: bool,
    align: bool,
) -> Result<PerturbedSpectrum> {
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    let oracle = MeasureOracle::new(sys, sol);
    let rows: Vec<Result<(f64, f64, bool)>> = radii
        .par_iter()
        .map(|&r| {
            let ball = Interval::ball(z, r);
            let mass = ball.map_or(0.0, |b| oracle.lambda_interval(b));
            if on_survivor && mass == 0.0 {
                return Err(Error::InconsistentClassification { z, radius: r });
            }
            let frame = ball_frame(sys, sol, ball, align);
            let op = build_operator(sys, &frame.partition, Variant::TargetPerturbed, ball)?;
            let e = leading_eigs_from(&op, EIG_TOL, EIG_MAX_ITER, &frame.masses, &frame.dual)?;
            Ok((e.lambda, sol.alpha * mass, frame.aligned))
        })
        .collect();
    let mut out = PerturbedSpectrum {
        radii: radii.to_vec(),
        lambda_n: Vec::with_capacity(radii.len()),
        delta_n: Vec::with_capacity(radii.len()),
        slope_estimates: Vec::with_capacity(radii.len()),
        aligned: Vec::with_capacity(radii.len()),
    };
    for row in rows {
        let (lambda, delta, aligned) = row?;
        out.lambda_n.push(lambda);
        out.delta_n.push(delta);
        out.slope_estimates.push(if delta > 0.0 {
            (sol.alpha - lambda) / delta
        } else {
            f64::NAN
        });
        out.aligned.push(aligned);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::{IntervalSet, PiecewiseExpandingMap};
    use crate::ulam::{build_partition, spectral_solution};

    fn golden_mean() -> OpenSystem {
        let hole = IntervalSet::from_interval(Interval::new(0.0, 0.25).unwrap());
        OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).unwrap()
    }

    #[test]
    fn empty_ball_gives_one() {
        let sys = golden_mean();
        let p = Arc::new(build_partition(&sys, 64, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        // Radius far below the resolution of any float near z = 0.1.
        let curve = evd_operator_curve(&sys, &sol, 0.1, &[(1, 50.0), (10, 50.0), (40, 50.0)]).unwrap();
        for v in curve {
            assert!((v - 1.0).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn periodic_target_spectral_slope() {
        let sys = golden_mean();
        let p = Arc::new(build_partition(&sys, 256, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        let radii: Vec<f64> = (8..=12).map(|k| 2f64.powi(-k)).collect();
        let s = perturbed_eigenvalue_curve(&sys, &sol, 1.0 / 3.0, &radii, true, true).unwrap();
        for w in s.lambda_n.windows(2) {
            assert!(w[0] <= w[1] + 1e-15);
        }
        assert!(s.lambda_n.iter().all(|l| *l <= sol.alpha));
        let theta = (1.0 + 5f64.sqrt()) / 2.0 - 1.0;
        let last = *s.slope_estimates.last().unwrap();
        assert!((last - theta).abs() < 0.05 * theta, "{last}");
    }

    #[test]
    fn off_survivor_ball_keeps_alpha_exactly() {
        let sys = golden_mean();
        let p = Arc::new(build_partition(&sys, 1 << 12, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        let s = perturbed_eigenvalue_curve(&sys, &sol, 0.1, &[0.2, 0.1, 0.01], false, false).unwrap();
        for l in &s.lambda_n {
            assert_eq!(l.to_bits(), sol.alpha.to_bits());
        }
        assert!(s.delta_n.iter().all(|d| *d == 0.0));
    }
}
