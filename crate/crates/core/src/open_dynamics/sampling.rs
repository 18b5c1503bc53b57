use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::interval_maps::OpenSystem;
use crate::ulam::{BinPartition, SpectralSolution};

/// Independent random stream for particle `index` of the run seeded with
/// `seed`. Streams do not depend on how particles are split among workers.
pub fn particle_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sampler for a piecewise-constant density on a bin partition.
#[derive(Debug, Clone)]
pub struct DensitySampler {
    breakpoints: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DensitySampler {
    /// `weights` are per-bin density values (not masses).
    pub fn new(weights: &[f64], partition: &BinPartition) -> Result<Self> {
        if weights.len() != partition.len() {
            return Err(Error::InvalidInput(format!(
                "{} weights for {} bins",
                weights.len(),
                partition.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("density weights must be finite and nonnegative".into()));
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w * partition.width(i);
            cumulative.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::EmptyDensity);
        }
        cumulative.iter_mut().for_each(|c| *c /= acc);
        Ok(DensitySampler {
            breakpoints: partition.breakpoints().to_vec(),
            cumulative,
        })
    }

    /// Sampler for `ν = 1_{X0} h0 m`.
    pub fn nu(sol: &SpectralSolution) -> Result<Self> {
        let fractions = sol.open_operator.retained_fraction();
        let weights: Vec<f64> = sol.h0.iter().zip(fractions).map(|(h, f)| h * f).collect();
        Self::new(&weights, &sol.partition)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let i = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1);
        // First bin whose cumulative mass exceeds u, so empty bins are never chosen.
        let (lo, hi) = (self.breakpoints[i], self.breakpoints[i + 1]);
        let v: f64 = rng.random();
        lo + v * (hi - lo)
    }
}

/// One draw from a piecewise-constant density.
pub fn sample_from_density<R: Rng + ?Sized>(
    weights: &[f64],
    partition: &BinPartition,
    rng: &mut R,
) -> Result<f64> {
    Ok(DensitySampler::new(weights, partition)?.sample(rng))
}

/// Draws from `ν`, resampling points that fall in the hole (possible only
/// when a bin straddles a hole endpoint).
pub(crate) fn sample_nu<R: Rng + ?Sized>(sys: &OpenSystem, sampler: &DensitySampler, rng: &mut R) -> f64 {
    loop {
        let x = sampler.sample(rng);
        if !sys.in_hole(x) {
            return x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_ks() {
        let p = BinPartition::from_breakpoints((0..=8).map(|i| i as f64 / 8.0).collect()).unwrap();
        let s = DensitySampler::new(&[1.0; 8], &p).unwrap();
        let mut rng = particle_rng(7, 0);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, x)| ((i + 1) as f64 / n as f64 - x).abs().max((x - i as f64 / n as f64).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "{ks}");
    }

    #[test]
    fn golden_mean_bin_frequencies() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let p = BinPartition::from_breakpoints(vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        let s = DensitySampler::new(&[0.0, 1.0, phi, phi], &p).unwrap();
        let mut rng = particle_rng(1, 3);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[p.locate(s.sample(&mut rng))] += 1;
        }
        let total = 1.0 + 2.0 * phi;
        let expect = [0.0, 1.0 / total, phi / total, phi / total];
        for (c, e) in counts.iter().zip(expect) {
            assert!((*c as f64 / n as f64 - e).abs() < 0.01);
        }
    }

    #[test]
    fn single_bin_support_and_empty() {
        let p = BinPartition::from_breakpoints(vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        let mut rng = particle_rng(0, 0);
        for _ in 0..1000 {
            let x = sample_from_density(&[0.0, 3.0, 0.0], &p, &mut rng).unwrap();
            assert!((0.25..0.5).contains(&x));
        }
        assert_eq!(
            sample_from_density(&[0.0; 3], &p, &mut rng),
            Err(Error::EmptyDensity)
        );
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = (0..4).map(|i| particle_rng(9, i).random()).collect();
        let b: Vec<u64> = (0..4).map(|i| particle_rng(9, i).random()).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }
}
