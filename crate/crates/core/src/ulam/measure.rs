use super::spectral::SpectralSolution;
use crate::interval_maps::{BranchForm, Interval, IntervalSet, OpenSystem};

/// Recursion depth for sub-bin conformal measure before falling back to
/// uniform interpolation inside the bin.
const MAX_DEPTH: usize = 80;

/// Invariant mass of a ball. Implemented by [`MeasureOracle`]; tests can
/// supply surrogates (for example a measure with an atom).
pub trait BallMass {
    fn ball_mass(&self, z: f64, r: f64) -> f64;
}

/// Evaluates `μ0`, `Λ` and `ν` on intervals.
///
/// Whole bins use the eigenvector weights. Inside a bin, on an exact
/// (affine Markov) discretization, `μ0` is resolved with the conformal
/// relation `μ0(A) = μ0(T A) / (α |T'|)` for `A` inside one bin of `X0`;
/// `Λ` then follows because `h0` is constant on bins. Otherwise the bin
/// content is interpolated uniformly.
pub struct MeasureOracle<'a> {
    sys: &'a OpenSystem,
    sol: &'a SpectralSolution,
    mu_prefix: Vec<f64>,
    lambda_prefix: Vec<f64>,
}

fn prefix(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for x in v {
        acc += x;
        out.push(acc);
    }
    out
}

impl<'a> MeasureOracle<'a> {
    pub fn new(sys: &'a OpenSystem, sol: &'a SpectralSolution) -> Self {
        MeasureOracle {
            sys,
            sol,
            mu_prefix: prefix(&sol.mu0),
            lambda_prefix: prefix(&sol.lambda_weights),
        }
    }

    pub fn solution(&self) -> &SpectralSolution {
        self.sol
    }

    /// `μ0(J)` for `J` inside bin `i`.
    fn mu0_in_bin(&self, i: usize, j: Interval, depth: usize) -> f64 {
        let weight = self.sol.mu0[i];
        if weight == 0.0 {
            return 0.0;
        }
        let bin = self.sol.partition.bin(i);
        if j.lo <= bin.lo && j.hi >= bin.hi {
            return weight;
        }
        let uniform = weight * j.len() / bin.len();
        if !self.sol.exact || depth >= MAX_DEPTH {
            return uniform;
        }
        let branch = self.sys.map().branch_at(bin.midpoint());
        let BranchForm::Affine { slope, .. } = branch.form else {
            return uniform;
        };
        let image = branch.image_of(&j);
        self.mu0_depth(image, depth + 1) / (self.sol.alpha * slope.abs())
    }

    fn mu0_depth(&self, iv: Interval, depth: usize) -> f64 {
        let p = &self.sol.partition;
        let bins = p.overlapping(iv.lo, iv.hi);
        if bins.is_empty() {
            return 0.0;
        }
        let (first, last) = (bins.start, bins.end - 1);
        let mut total = 0.0;
        let mut full_lo = first;
        let mut full_hi = last + 1;
        if iv.lo > p.bin(first).lo {
            if let Some(part) = iv.intersect(&p.bin(first)) {
                total += self.mu0_in_bin(first, part, depth);
            }
            full_lo = first + 1;
        }
        if iv.hi < p.bin(last).hi && last >= full_lo {
            if let Some(part) = iv.intersect(&p.bin(last)) {
                total += self.mu0_in_bin(last, part, depth);
            }
            full_hi = last;
        }
        if full_hi > full_lo {
            total += self.mu_prefix[full_hi] - self.mu_prefix[full_lo];
        }
        total
    }

    pub fn mu0_interval(&self, iv: Interval) -> f64 {
        self.mu0_depth(iv, 0)
    }

    /// `Λ(J)` for `J` inside bin `i`.
    fn lambda_in_bin(&self, i: usize, j: Interval) -> f64 {
        let weight = self.sol.lambda_weights[i];
        if weight == 0.0 {
            return 0.0;
        }
        let bin = self.sol.partition.bin(i);
        if j.lo <= bin.lo && j.hi >= bin.hi {
            return weight;
        }
        if !self.sol.exact {
            return weight * j.len() / bin.len();
        }
        let mu = self.sol.mu0[i];
        if mu == 0.0 {
            return 0.0;
        }
        weight * self.mu0_in_bin(i, j, 0) / mu
    }

    pub fn lambda_interval(&self, iv: Interval) -> f64 {
        let p = &self.sol.partition;
        let bins = p.overlapping(iv.lo, iv.hi);
        if bins.is_empty() {
            return 0.0;
        }
        let (first, last) = (bins.start, bins.end - 1);
        let mut total = 0.0;
        let mut full_lo = first;
        let mut full_hi = last + 1;
        if iv.lo > p.bin(first).lo {
            if let Some(part) = iv.intersect(&p.bin(first)) {
                total += self.lambda_in_bin(first, part);
            }
            full_lo = first + 1;
        }
        if iv.hi < p.bin(last).hi && last >= full_lo {
            if let Some(part) = iv.intersect(&p.bin(last)) {
                total += self.lambda_in_bin(last, part);
            }
            full_hi = last;
        }
        if full_hi > full_lo {
            total += self.lambda_prefix[full_hi] - self.lambda_prefix[full_lo];
        }
        total
    }

    pub fn lambda_set(&self, s: &IntervalSet) -> f64 {
        s.components().iter().map(|iv| self.lambda_interval(*iv)).sum()
    }

    pub fn mu0_set(&self, s: &IntervalSet) -> f64 {
        s.components().iter().map(|iv| self.mu0_interval(*iv)).sum()
    }

    /// `ν(S) = ∫_{S ∩ X0} h0 dm`.
    pub fn nu_set(&self, s: &IntervalSet) -> f64 {
        let p = &self.sol.partition;
        let x0 = self.sys.x0();
        s.intersect(x0)
            .components()
            .iter()
            .flat_map(|iv| {
                p.overlapping(iv.lo, iv.hi).filter_map(move |i| {
                    iv.intersect(&p.bin(i)).map(|part| self.sol.h0[i] * part.len())
                })
            })
            .sum()
    }
}

impl BallMass for MeasureOracle<'_> {
    fn ball_mass(&self, z: f64, r: f64) -> f64 {
        Interval::ball(z, r).map_or(0.0, |b| self.lambda_interval(b))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::interval_maps::PiecewiseExpandingMap;
    use crate::ulam::{build_partition, spectral_solution};

    fn golden_mean() -> OpenSystem {
        let hole = IntervalSet::from_interval(Interval::new(0.0, 0.25).unwrap());
        OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).unwrap()
    }

    #[test]
    fn sub_bin_mass_matches_finer_partition() {
        let sys = golden_mean();
        let coarse = Arc::new(build_partition(&sys, 4, true).unwrap());
        let fine = Arc::new(build_partition(&sys, 1024, true).unwrap());
        let a = spectral_solution(&sys, &coarse).unwrap();
        let b = spectral_solution(&sys, &fine).unwrap();
        let (oa, ob) = (MeasureOracle::new(&sys, &a), MeasureOracle::new(&sys, &b));
        for (lo, hi) in [(0.3, 0.34), (0.5, 0.5625), (0.26, 0.9), (0.625, 0.75)] {
            let iv = Interval::new(lo, hi).unwrap();
            let (x, y) = (oa.lambda_interval(iv), ob.lambda_interval(iv));
            assert!((x - y).abs() < 1e-9, "[{lo}, {hi}): {x} vs {y}");
            let (x, y) = (oa.mu0_interval(iv), ob.mu0_interval(iv));
            assert!((x - y).abs() < 1e-9, "[{lo}, {hi}): {x} vs {y}");
        }
    }

    #[test]
    fn ball_outside_survivors_is_null() {
        let sys = golden_mean();
        let p = Arc::new(build_partition(&sys, 4, true).unwrap());
        let sol = spectral_solution(&sys, &p).unwrap();
        let o = MeasureOracle::new(&sys, &sol);
        // [0.25, 1/3) misses the survivor set.
        assert_eq!(o.ball_mass(0.29, 0.04), 0.0);
        assert!(o.ball_mass(1.0 / 3.0, 1e-3) > 0.0);
        assert!((o.lambda_set(&IntervalSet::unit()) - 1.0).abs() < 1e-12);
        assert!((o.nu_set(&IntervalSet::unit()) - 1.0).abs() < 1e-12);
    }
}
