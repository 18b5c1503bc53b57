use std::sync::Arc;

use super::eigen::{
    leading_eigs, leading_eigs_from, second_eigenvalue_modulus, EIG_MAX_ITER, EIG_TOL,
};
use super::operator::{build_operator, DiscretizedOperator, Variant};
use super::partition::BinPartition;
use crate::error::{Error, Result};
use crate::interval_maps::OpenSystem;

/// Lambda weights below this are treated as outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Eigendata of the open system on one partition.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub partition: Arc<BinPartition>,
    /// Escape factor: top eigenvalue of the open operator.
    pub alpha: f64,
    /// Per-bin values of the conditionally invariant density, with
    /// `∫_{X0} h0 dm = 1`.
    pub h0: Vec<f64>,
    /// Per-bin weights of the conformal measure (a probability).
    pub mu0: Vec<f64>,
    /// Per-bin weights of `Λ = h0 μ0` (a probability).
    pub lambda_weights: Vec<f64>,
    pub lambda2_abs: f64,
    pub gap: f64,
    pub h_minus: f64,
    /// Affine map on a Markov partition: the discretization is exact.
    pub exact: bool,
    pub open_operator: DiscretizedOperator,
    /// Left eigenvector as bin masses (sum 1).
    masses: Vec<f64>,
    /// Right eigenvector as bin densities of `μ0` w.r.t. Lebesgue.
    dual: Vec<f64>,
}

impl SpectralSolution {
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Density of `μ0` with respect to Lebesgue, bin by bin.
    pub fn dual(&self) -> &[f64] {
        &self.dual
    }

    pub fn len(&self) -> usize {
        self.partition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn from_eigs(
        sys: &OpenSystem,
        op: DiscretizedOperator,
        lambda: f64,
        masses: Vec<f64>,
        dual: Vec<f64>,
        lambda2_abs: f64,
    ) -> Result<Self> {
        let partition = Arc::clone(op.partition());
        let w = partition.widths();
        let in_x0: f64 = masses
            .iter()
            .zip(op.retained_fraction())
            .map(|(p, f)| p * f)
            .sum();
        if !(in_x0 > 0.0) {
            return Err(Error::EmptyDensity);
        }
        let h0: Vec<f64> = masses.iter().zip(&w).map(|(p, wi)| p / wi / in_x0).collect();
        let mu_raw: Vec<f64> = dual.iter().zip(&w).map(|(g, wi)| g * wi).collect();
        let mu_total: f64 = mu_raw.iter().sum();
        let mu0: Vec<f64> = mu_raw.iter().map(|m| m / mu_total).collect();
        let lam_raw: Vec<f64> = masses.iter().zip(&dual).map(|(p, g)| p * g).collect();
        let lam_total: f64 = lam_raw.iter().sum();
        if !(lam_total > 0.0) || !(mu_total > 0.0) {
            return Err(Error::EmptyDensity);
        }
        let lambda_weights: Vec<f64> = lam_raw.iter().map(|l| l / lam_total).collect();
        let h_minus = h0
            .iter()
            .zip(&lambda_weights)
            .filter(|(_, l)| **l > SUPPORT_TOL)
            .map(|(h, _)| *h)
            .fold(f64::INFINITY, f64::min);
        Ok(SpectralSolution {
            exact: partition.markov && sys.map().is_affine(),
            partition,
            alpha: lambda,
            h0,
            mu0,
            lambda_weights,
            lambda2_abs,
            gap: lambda - lambda2_abs,
            h_minus,
            open_operator: op,
            masses,
            dual,
        })
    }

    /// Re-solves on a Markov refinement containing `extra` points, warm
    /// started from this solution. `None` when the refinement does not close
    /// within `cap` new points or the partition is not Markov.
    pub fn refine_with(
        &self,
        sys: &OpenSystem,
        extra: &[f64],
        cap: usize,
    ) -> Result<Option<SpectralSolution>> {
        let Some(fine) = self.partition.refine_with(sys.map(), extra, cap) else {
            return Ok(None);
        };
        let fine = Arc::new(fine);
        let mut masses = Vec::with_capacity(fine.len());
        let mut dual = Vec::with_capacity(fine.len());
        for i in 0..fine.len() {
            let parent = self.partition.locate(fine.bin(i).midpoint());
            let share = fine.width(i) / self.partition.width(parent);
            masses.push(self.masses[parent] * share);
            dual.push(self.dual[parent]);
        }
        let op = build_operator(sys, &fine, open_variant(sys), None)?;
        let e = leading_eigs_from(&op, EIG_TOL, EIG_MAX_ITER, &masses, &dual)?;
        let l2 = second_eigenvalue_modulus(&op, &e);
        Self::from_eigs(sys, op, e.lambda, e.density, e.dual, l2).map(Some)
    }
}

fn open_variant(sys: &OpenSystem) -> Variant {
    if sys.is_closed() {
        Variant::Closed
    } else {
        Variant::Open
    }
}

/// Solves the open eigenproblem on `partition`.
pub fn spectral_solution(sys: &OpenSystem, partition: &Arc<BinPartition>) -> Result<SpectralSolution> {
    spectral_solution_with_tol(sys, partition, EIG_TOL)
}

/// As [`spectral_solution`] with a custom power-iteration tolerance. A
/// leading eigenvalue in a Jordan block (for example a countable survivor
/// set) converges only like `1/k`.
pub fn spectral_solution_with_tol(
    sys: &OpenSystem,
    partition: &Arc<BinPartition>,
    tol: f64,
) -> Result<SpectralSolution> {
    let op = build_operator(sys, partition, open_variant(sys), None)?;
    let e = leading_eigs(&op, tol, EIG_MAX_ITER)?;
    let l2 = second_eigenvalue_modulus(&op, &e);
    SpectralSolution::from_eigs(sys, op, e.lambda, e.density, e.dual, l2)
}

/// `alpha > d_const / beta`: the hole is small enough for the extremal
/// index formula to be positive.
pub fn check_hole_smallness(sol: &SpectralSolution, beta: f64, d_const: f64) -> bool {
    hole_smallness(sol.alpha, beta, d_const)
}

pub fn hole_smallness(alpha: f64, beta: f64, d_const: f64) -> bool {
    alpha > d_const / beta
}

/// Surrogate for the norm of `L - L0` from BV to L¹: the largest L¹
/// distance between the closed and open actions on indicators of dyadic
/// intervals of generation at most 10, each scaled to unit BV norm.
pub fn check_operator_closeness(sys: &OpenSystem, partition: &Arc<BinPartition>) -> Result<f64> {
    if sys.is_closed() {
        return Ok(0.0);
    }
    let closed = build_operator(sys, partition, Variant::Closed, None)?;
    let open = build_operator(sys, partition, Variant::Open, None)?;
    let mut worst: f64 = 0.0;
    let mut diff = vec![0.0; partition.len()];
    for gen in 0..=10u32 {
        let count = 1usize << gen;
        let len = 1.0 / count as f64;
        for k in 0..count {
            let (lo, hi) = (k as f64 * len, (k + 1) as f64 * len);
            let bins = partition.overlapping(lo, hi);
            let mut touched = Vec::new();
            for i in bins {
                let b = partition.bin(i);
                let mass = (b.hi.min(hi) - b.lo.max(lo)).max(0.0);
                if mass == 0.0 {
                    continue;
                }
                let share = mass / b.len();
                for (j, v) in closed.row(i) {
                    diff[j] += share * b.len() * v;
                    touched.push(j);
                }
                for (j, v) in open.row(i) {
                    diff[j] -= share * b.len() * v;
                }
            }
            let l1: f64 = touched.iter().map(|&j| std::mem::take(&mut diff[j]).abs()).sum();
            // Indicator of an interval: L¹ norm len plus variation 2.
            worst = worst.max(l1 / (len + 2.0));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::{Interval, IntervalSet, PiecewiseExpandingMap};
    use crate::ulam::partition::build_partition;

    fn golden_mean() -> OpenSystem {
        let hole = IntervalSet::from_interval(Interval::new(0.0, 0.25).unwrap());
        OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).unwrap()
    }

    #[test]
    fn golden_mean_solution() {
        let sys = golden_mean();
        let p = Arc::new(build_partition(&sys, 4, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let alpha = phi / 2.0;
        assert!((sol.alpha - alpha).abs() < 1e-10);
        let x0_integral: f64 = sol.h0[1..].iter().map(|h| h / 4.0).sum();
        assert!((x0_integral - 1.0).abs() < 1e-12);
        let total: f64 = sol.h0.iter().map(|h| h / 4.0).sum();
        assert!((total - 1.0 / alpha).abs() < 1e-10);
        assert!(sol.mu0[0] <= 1e-10);
        // Λ bins proportional to mass times dual: (0, phi, phi, phi^2).
        let s = 2.0 * phi + phi * phi;
        for (a, b) in sol.lambda_weights.iter().zip([0.0, phi, phi, phi * phi]) {
            assert!((a - b / s).abs() < 1e-10);
        }
        assert!(sol.h_minus > 0.0);
        assert!((sol.gap - 0.5).abs() < 1e-6);
        assert!(sol.exact);
    }

    #[test]
    fn closed_limit_is_lebesgue() {
        let sys = OpenSystem::closed(PiecewiseExpandingMap::doubling());
        let p = Arc::new(build_partition(&sys, 16, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        assert!((sol.alpha - 1.0).abs() < 1e-12);
        for m in &sol.mu0 {
            assert!((m - 1.0 / 16.0).abs() < 1e-12);
        }
        assert_eq!(check_operator_closeness(&sys, &p).unwrap(), 0.0);
    }

    #[test]
    fn hole_smallness_arithmetic() {
        assert!(hole_smallness((1.0 + 5f64.sqrt()) / 4.0, 2.0, 1.1));
        assert!(!hole_smallness(0.4, 2.0, 1.1));
        assert!(hole_smallness(1.0, 2.0, 1.9));
    }

    #[test]
    fn closeness_bounded_and_monotone() {
        let sys = golden_mean();
        let p = Arc::new(build_partition(&sys, 1024, true).unwrap());
        let small = check_operator_closeness(&sys, &p).unwrap();
        assert!(small <= 0.25 + 1e-8);
        let big_hole = IntervalSet::from_interval(Interval::new(0.0, 0.375).unwrap());
        let big = OpenSystem::new(PiecewiseExpandingMap::doubling(), big_hole).unwrap();
        let q = Arc::new(build_partition(&big, 1024, true).unwrap());
        assert!(check_operator_closeness(&big, &q).unwrap() >= small);
    }

    #[test]
    fn refinement_keeps_the_eigenvalue() {
        let sys = golden_mean();
        let p = Arc::new(build_partition(&sys, 64, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        let fine = sol.refine_with(&sys, &[1.0 / 3.0 - 0.001, 1.0 / 3.0 + 0.001], 10_000).unwrap().unwrap();
        assert!(fine.len() > sol.len());
        assert!((fine.alpha - sol.alpha).abs() < 1e-10);
    }
}
