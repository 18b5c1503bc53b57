use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::interval_maps::{Interval, IntervalSet, PiecewiseExpandingMap};
use crate::ulam::{build_partition, spectral_solution, BallMass, MeasureOracle};

fn gev_sample(loc: f64, scale: f64, shape: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let y = -u.ln();
            if shape == 0.0 {
                loc - scale * y.ln()
            } else {
                loc + scale * (y.powf(-shape) - 1.0) / shape
            }
        })
        .collect()
}

#[test]
fn constant_trajectory_maximum() {
    let z = 0.5;
    let x = z + (-3f64).exp();
    let m = block_maxima(&[vec![x; 20]], z, 16).unwrap();
    assert!((m[0] - 3.0).abs() < 1e-12);
    assert!(matches!(block_maxima(&[vec![x; 20]], z, 8), Err(Error::Domain { .. })));
    assert!(matches!(
        block_maxima(&[vec![x; 10]], z, 16),
        Err(Error::InsufficientData { .. })
    ));
}

#[test]
fn uniform_surrogate_maxima() {
    // Independent uniforms: P(M_n <= u) = (1 - 2 e^{-u})^n while the ball
    // stays inside [0, 1].
    let (z, n, count) = (0.4, 32, 20_000);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let paths: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect();
    let maxima = block_maxima(&paths, z, n).unwrap();
    for u in [2.0f64, 3.0, 4.0, 5.0, 6.0] {
        let exact = (1.0 - 2.0 * (-u).exp()).powi(n as i32);
        let emp = maxima.iter().filter(|m| **m <= u).count() as f64 / count as f64;
        let se = (exact * (1.0 - exact) / count as f64).sqrt();
        assert!((emp - exact).abs() < 4.0 * se + 1e-3, "u = {u}: {emp} vs {exact}");
    }
}

#[test]
fn gumbel_recovery() {
    let fit = fit_gev(&gev_sample(2.0, 0.5, 0.0, 100_000, 1)).unwrap();
    assert!((fit.location - 2.0).abs() < 0.02, "{fit:?}");
    assert!((fit.scale - 0.5).abs() < 0.02, "{fit:?}");
    assert!(fit.shape.abs() < 0.03, "{fit:?}");
    assert!(!fit.flagged);
    assert!(fit.ks_statistic < 0.01);
}

#[test]
fn frechet_shape_is_flagged() {
    let fit = fit_gev(&gev_sample(0.0, 1.0, 0.3, 100_000, 2)).unwrap();
    assert!((fit.shape - 0.3).abs() < 0.05, "{fit:?}");
    assert!(fit.flagged);
}

#[test]
fn affine_equivariance() {
    let x = gev_sample(1.0, 2.0, 0.1, 5_000, 3);
    let (c, d) = (3.5, -7.0);
    let a = fit_gev(&x).unwrap();
    let b = fit_gev(&x.iter().map(|v| c * v + d).collect::<Vec<_>>()).unwrap();
    assert!((b.location - (c * a.location + d)).abs() < 1e-9);
    assert!((b.scale - c * a.scale).abs() < 1e-9);
    assert!((b.shape - a.shape).abs() < 1e-9);
}

#[test]
fn fit_errors() {
    assert!(matches!(fit_gev(&[1.0; 300]), Err(Error::DegenerateSample { n: 300 })));
    assert!(matches!(fit_gev(&[1.0; 100]), Err(Error::InsufficientData { .. })));
}

#[test]
fn refit_within_three_standard_errors() {
    let fit = fit_gev(&gev_sample(1.5, 0.7, 0.0, 2_000, 4)).unwrap();
    // Standard errors from replicate samples of the fitted law.
    let reps: Vec<GevFit> = (0..200)
        .map(|s| fit_gev(&gev_sample(fit.location, fit.scale, fit.shape, 2_000, 100 + s)).unwrap())
        .collect();
    let sd = |f: fn(&GevFit) -> f64| {
        let m = reps.iter().map(f).sum::<f64>() / reps.len() as f64;
        (reps.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (reps.len() - 1) as f64).sqrt()
    };
    let again = fit_gev(&gev_sample(fit.location, fit.scale, fit.shape, 2_000, 9_999)).unwrap();
    assert!((again.location - fit.location).abs() < 3.0 * sd(|f| f.location));
    assert!((again.scale - fit.scale).abs() < 3.0 * sd(|f| f.scale));
    assert!((again.shape - fit.shape).abs() < 3.0 * sd(|f| f.shape));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn lmoment_fit_ignores_order(seed in any::<u64>(), swaps in prop::collection::vec((0usize..400, 0usize..400), 1..50)) {
        let x = gev_sample(0.0, 1.0, 0.05, 400, seed);
        let mut y = x.clone();
        for (a, b) in swaps {
            y.swap(a, b);
        }
        prop_assert_eq!(fit_gev(&x).unwrap(), fit_gev(&y).unwrap());
    }
}

struct Lebesgue;

impl BallMass for Lebesgue {
    fn ball_mass(&self, z: f64, r: f64) -> f64 {
        (z + r).min(1.0) - (z - r).max(0.0)
    }
}

struct Atom;

impl BallMass for Atom {
    fn ball_mass(&self, z: f64, r: f64) -> f64 {
        // All mass in the bin [0.25, 0.3125), which holds z.
        if z - r < 0.3125 && z + r > 0.25 {
            1.0
        } else {
            0.0
        }
    }
}

#[test]
fn lebesgue_dimension_is_one() {
    let u: Vec<f64> = (2..=20).map(f64::from).collect();
    let d = local_dimension(&Lebesgue, 0.3, &u).unwrap();
    assert!((d.hd_lower_bound - 1.0).abs() < 0.02);
    assert!(d.d_n_values.iter().all(|v| *v > 0.0 && *v <= 1.0));
    assert!((d.d_n_values.last().unwrap() - 1.0).abs() < 0.05);
    assert!(!d.atom_flag);
    let n: Vec<usize> = u.iter().map(|v| (v.exp() / 2.0) as usize).collect();
    assert!(d.fdd_bound(&n).unwrap().abs() < 1.0);
}

#[test]
fn atom_is_flagged() {
    let u: Vec<f64> = (2..=20).map(f64::from).collect();
    let d = local_dimension(&Atom, 0.28, &u).unwrap();
    assert!(d.t0_hat < 0.05);
    assert!(d.atom_flag);
    assert!(matches!(local_dimension(&Atom, 0.9, &u), Err(Error::OffSupport { .. })));
}

fn golden_mean() -> (OpenSystem, crate::ulam::SpectralSolution) {
    let hole = IntervalSet::from_interval(Interval::new(0.0, 0.25).unwrap());
    let sys = OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).unwrap();
    let p = Arc::new(build_partition(&sys, 1 << 14, true).unwrap());
    let sol = spectral_solution(&sys, &p).unwrap();
    (sys, sol)
}

#[test]
fn golden_mean_dimension() {
    let (sys, sol) = golden_mean();
    let oracle = MeasureOracle::new(&sys, &sol);
    let u: Vec<f64> = (2..=24).map(f64::from).collect();
    let d = local_dimension(&oracle, 1.0 / 3.0, &u).unwrap();
    // Cylinder masses scale like (2α)^{-n} on allowed words.
    let t0 = (2.0 * sol.alpha).ln() / 2f64.ln();
    assert!((d.t0_hat - t0).abs() < 0.05, "{} vs {t0}", d.t0_hat);
    assert!(d.hd_lower_bound <= 1.0);
}

#[test]
fn lebesgue_normalizing_sequences() {
    let sys = OpenSystem::closed(PiecewiseExpandingMap::doubling());
    let p = Arc::new(build_partition(&sys, 64, true).unwrap());
    let sol = spectral_solution(&sys, &p).unwrap();
    let z = 0.9192940507443652;
    let n_values = [512, 1024];
    let fits = gev_by_block_length(&sys, &sol, z, &n_values, 50_000, 5).unwrap();
    let ns = normalizing_sequences(&fits, &n_values).unwrap();
    // P(M_n <= u) ≈ exp(-2 n e^{-u}): a_n = 1, b_n = log n + log 2.
    for ((n, a), b) in n_values.iter().zip(&ns.a_n).zip(&ns.b_n) {
        assert!((a - 1.0).abs() < 0.05, "n = {n}: a_n = {a}");
        let off = b - (*n as f64).ln() - 2f64.ln();
        assert!(off.abs() < 0.05, "n = {n}: b_n = {b}");
    }
}

#[test]
fn golden_mean_normalizing_sequences() {
    let (sys, sol) = golden_mean();
    let t0 = (2.0 * sol.alpha).ln() / 2f64.ln();
    let n_values = [512, 1024];
    let fits = gev_by_block_length(&sys, &sol, 1.0 / 3.0, &n_values, 50_000, 6).unwrap();
    let ns = normalizing_sequences(&fits, &n_values).unwrap();
    let a = ns.a_limit().unwrap();
    assert!((a - t0).abs() < 0.1 * t0, "a_n = {:?}", ns.a_n);
    let (_, inc) = ns.doubling_increments()[0];
    let target = 2f64.ln() / t0;
    assert!((inc - target).abs() < 0.1 * target, "b_2n - b_n = {inc}");
}

