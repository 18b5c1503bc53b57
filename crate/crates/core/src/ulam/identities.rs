//! Residuals of the measure identities satisfied by an exact solution.

use super::measure::MeasureOracle;
use super::spectral::SpectralSolution;
use crate::error::{Error, Result};
use crate::interval_maps::{IntervalSet, OpenSystem};

/// `|Σ (L0 v) w μ0 - α Σ v (w∘T) μ0|`, relative to the larger side.
/// `v` and `w` are per-bin density values. `w∘T` is read off at the image
/// of each bin's midpoint, which is exact when `w` is constant on every
/// image `T(b_i)`.
pub fn duality_residual(sys: &OpenSystem, sol: &SpectralSolution, v: &[f64], w: &[f64]) -> Result<f64> {
    let p = &sol.partition;
    if v.len() != p.len() || w.len() != p.len() {
        return Err(Error::InvalidInput("v and w need one value per bin".into()));
    }
    let widths = p.widths();
    let masses: Vec<f64> = v.iter().zip(&widths).map(|(a, b)| a * b).collect();
    let pushed = sol.open_operator.push_forward(&masses);
    let lhs: f64 = (0..p.len())
        .map(|j| pushed[j] / widths[j] * w[j] * sol.mu0[j])
        .sum();
    let frac = sol.open_operator.retained_fraction();
    let mut rhs = 0.0;
    for i in 0..p.len() {
        if frac[i] == 0.0 {
            continue;
        }
        let wt = w[p.locate(sys.map().evaluate(p.bin(i).midpoint()))];
        rhs += v[i] * frac[i] * wt * sol.mu0[i];
    }
    rhs *= sol.alpha;
    let scale = lhs.abs().max(rhs.abs());
    Ok(if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 })
}

/// Largest `|μ0(T A) - α |T'| μ0(A)|` over bins `A` inside `X0` on which
/// `T` is injective.
pub fn conformality_residual(sys: &OpenSystem, sol: &SpectralSolution) -> Result<f64> {
    let oracle = MeasureOracle::new(sys, sol);
    let p = &sol.partition;
    let frac = sol.open_operator.retained_fraction();
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        if frac[i] < 1.0 {
            continue;
        }
        let bin = p.bin(i);
        let Some(branch) = sys
            .map()
            .branches()
            .iter()
            .find(|b| b.domain.lo <= bin.lo && bin.hi <= b.domain.hi)
        else {
            continue;
        };
        let image = branch.image_of(&bin);
        let lhs = oracle.mu0_set(&IntervalSet::from_interval(image));
        let rhs = sol.alpha * branch.derivative(bin.midpoint()).abs() * sol.mu0[i];
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Largest `|Λ(T^{-1} A) - Λ(A)|` over the test sets.
pub fn lambda_invariance_residual(
    sys: &OpenSystem,
    sol: &SpectralSolution,
    sets: &[IntervalSet],
) -> Result<f64> {
    let oracle = MeasureOracle::new(sys, sol);
    let mut worst: f64 = 0.0;
    for a in sets {
        let pre = sys.map().preimage_set(a)?;
        worst = worst.max((oracle.lambda_set(&pre) - oracle.lambda_set(a)).abs());
    }
    Ok(worst)
}

/// `∫ h0 dm` over the whole interval.
pub fn h0_integral(sol: &SpectralSolution) -> f64 {
    sol.h0
        .iter()
        .zip(sol.partition.widths())
        .map(|(h, w)| h * w)
        .sum()
}

/// `ν(X_n)` for `n = 0, ..., n_max`, by exact interval algebra.
pub fn nu_survival(sys: &OpenSystem, sol: &SpectralSolution, n_max: usize) -> Result<Vec<f64>> {
    let oracle = MeasureOracle::new(sys, sol);
    Ok(sys
        .survivor_sequence(n_max)?
        .iter()
        .map(|x| oracle.nu_set(x))
        .collect())
}
