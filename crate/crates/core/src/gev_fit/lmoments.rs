use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::extremes::observable_phi;

pub const MIN_BLOCK_LEN: usize = 16;
pub const MIN_MAXIMA: usize = 200;
/// `|ξ|` above which the fit is flagged as outside the Gumbel domain.
pub const SHAPE_FLAG: f64 = 0.1;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Generalized extreme value fit, `F(x) = exp(-(1 + ξ (x - μ)/σ)^{-1/ξ})`.
/// Positive `shape` is the heavy-tailed (Fréchet) side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GevFit {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
    pub sample_size: usize,
    /// Kolmogorov-Smirnov distance between the sample and the fitted law.
    pub ks_statistic: f64,
    pub flagged: bool,
}

impl GevFit {
    pub fn cdf(&self, x: f64) -> f64 {
        let s = (x - self.location) / self.scale;
        if self.shape.abs() < 1e-12 {
            return (-(-s).exp()).exp();
        }
        let t = 1.0 + self.shape * s;
        if t <= 0.0 {
            return if self.shape > 0.0 { 0.0 } else { 1.0 };
        }
        (-t.powf(-1.0 / self.shape)).exp()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let y = -p.ln();
        if self.shape.abs() < 1e-12 {
            self.location - self.scale * y.ln()
        } else {
            self.location + self.scale * (y.powf(-self.shape) - 1.0) / self.shape
        }
    }
}

/// One block maximum of `φ = -log |x - z|` per trajectory of length at least
/// `block_len`, taken over its first `block_len` points.
pub fn block_maxima(trajectories: &[Vec<f64>], z: f64, block_len: usize) -> Result<Vec<f64>> {
    if block_len < MIN_BLOCK_LEN {
        return Err(Error::Domain {
            name: "block_len",
            value: block_len as f64,
        });
    }
    let maxima: Vec<f64> = trajectories
        .iter()
        .filter(|t| t.len() >= block_len)
        .map(|t| {
            t[..block_len]
                .iter()
                .map(|x| observable_phi(*x, z))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    if maxima.is_empty() {
        return Err(Error::InsufficientData {
            reason: format!("no trajectory survives {block_len} steps"),
        });
    }
    Ok(maxima)
}

/// Sample L-moments `(l1, l2, t3)` from unbiased probability-weighted moments.
pub fn sample_lmoments(sorted: &[f64]) -> (f64, f64, f64) {
    let n = sorted.len() as f64;
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (j, x) in sorted.iter().enumerate() {
        let j = j as f64;
        b0 += x;
        b1 += x * j / (n - 1.0);
        b2 += x * j * (j - 1.0) / ((n - 1.0) * (n - 2.0));
    }
    b0 /= n;
    b1 /= n;
    b2 /= n;
    let l2 = 2.0 * b1 - b0;
    let l3 = 6.0 * b2 - 6.0 * b1 + b0;
    (b0, l2, l3 / l2)
}

/// L-moment estimator of the GEV parameters, with Hosking's rational
/// approximation for the shape.
pub fn fit_gev(maxima: &[f64]) -> Result<GevFit> {
    if maxima.len() < MIN_MAXIMA {
        return Err(Error::InsufficientData {
            reason: format!("{} maxima, need {MIN_MAXIMA}", maxima.len()),
        });
    }
    if let Some(x) = maxima.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite maximum {x}")));
    }
    let mut sorted = maxima.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateSample { n: sorted.len() });
    }
    let (l1, l2, t3) = sample_lmoments(&sorted);
    if !(l2 > 0.0) {
        return Err(Error::DegenerateSample { n: sorted.len() });
    }
    let c = 2.0 / (3.0 + t3) - 2f64.ln() / 3f64.ln();
    let k = 7.8590 * c + 2.9554 * c * c;
    let (location, scale) = if k.abs() < 1e-9 {
        let scale = l2 / 2f64.ln();
        (l1 - EULER_GAMMA * scale, scale)
    } else {
        let g = gamma(1.0 + k);
        let scale = l2 * k / ((1.0 - 2f64.powf(-k)) * g);
        (l1 - scale * (1.0 - g) / k, scale)
    };
    let shape = -k;
    let mut fit = GevFit {
        location,
        scale,
        shape,
        sample_size: sorted.len(),
        ks_statistic: 0.0,
        flagged: shape.abs() > SHAPE_FLAG,
    };
    let n = sorted.len() as f64;
    fit.ks_statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = fit.cdf(*x);
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    Ok(fit)
}

/// `a_n = 1/scale_n` and `b_n = location_n` for a sequence of fits.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizingSequences {
    pub n_values: Vec<usize>,
    pub a_n: Vec<f64>,
    pub b_n: Vec<f64>,
}

impl NormalizingSequences {
    /// The value at the largest `n`.
    pub fn a_limit(&self) -> Option<f64> {
        self.a_n.last().copied()
    }

    /// `b_{2n} - b_n` for every `n` whose double is also present.
    pub fn doubling_increments(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (i, n) in self.n_values.iter().enumerate() {
            if let Some(j) = self.n_values.iter().position(|m| *m == 2 * n) {
                out.push((*n, self.b_n[j] - self.b_n[i]));
            }
        }
        out
    }

    /// Comparison targets `(t0, log n / t0)` for each `n`.
    pub fn targets(&self, t0: f64) -> Vec<(f64, f64)> {
        self.n_values.iter().map(|n| (t0, (*n as f64).ln() / t0)).collect()
    }
}

pub fn normalizing_sequences(fits: &[GevFit], n_values: &[usize]) -> Result<NormalizingSequences> {
    if fits.len() != n_values.len() {
        return Err(Error::InvalidInput(format!(
            "{} fits for {} values of n",
            fits.len(),
            n_values.len()
        )));
    }
    Ok(NormalizingSequences {
        n_values: n_values.to_vec(),
        a_n: fits.iter().map(|f| 1.0 / f.scale).collect(),
        b_n: fits.iter().map(|f| f.location).collect(),
    })
}
