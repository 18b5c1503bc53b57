use serde::Serialize;

use crate::error::{Error, Result};
use crate::ulam::BallMass;

/// `t0_hat` below this marks the measure as atomic at `z`.
pub const ATOM_THRESHOLD: f64 = 0.05;

/// Local dimension of `Λ` at `z` along `r_n = e^{-u_n}`.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionEstimate {
    pub z: f64,
    pub u_values: Vec<f64>,
    pub lambda_mass: Vec<f64>,
    /// `d_n = log Λ(B(z, e^{-u_n})) / (-u_n)`.
    pub d_n_values: Vec<f64>,
    /// Chord slopes `(log Λ_n - log Λ_0) / (u_0 - u_n)` from the first level.
    pub chord_slopes: Vec<f64>,
    /// Minimum of the chord slopes over the largest-`n` half.
    pub t0_hat: f64,
    pub hd_lower_bound: f64,
    pub atom_flag: bool,
}

impl DimensionEstimate {
    /// `sup_n {u_n - log n / t0_hat}`, with `n_values` paired to `u_values`.
    pub fn fdd_bound(&self, n_values: &[usize]) -> Option<f64> {
        if n_values.len() != self.u_values.len() || !(self.t0_hat > 0.0) {
            return None;
        }
        self.u_values
            .iter()
            .zip(n_values)
            .map(|(u, n)| u - (*n as f64).ln() / self.t0_hat)
            .reduce(f64::max)
    }
}

pub fn local_dimension<M: BallMass>(mass: &M, z: f64, u_values: &[f64]) -> Result<DimensionEstimate> {
    if u_values.is_empty() {
        return Err(Error::InsufficientData {
            reason: "no levels".into(),
        });
    }
    if u_values.windows(2).any(|w| !(w[1] > w[0])) || u_values.iter().any(|u| !(*u > 0.0)) {
        return Err(Error::InvalidInput("u values must be positive and increasing".into()));
    }
    let lambda_mass: Vec<f64> = u_values.iter().map(|u| mass.ball_mass(z, (-u).exp())).collect();
    for (u, m) in u_values.iter().zip(&lambda_mass) {
        if !(*m > 0.0) {
            return Err(Error::OffSupport {
                z,
                radius: (-u).exp(),
            });
        }
    }
    let logs: Vec<f64> = lambda_mass.iter().map(|m| m.ln()).collect();
    let d_n_values: Vec<f64> = logs.iter().zip(u_values).map(|(l, u)| -l / u).collect();
    let chord_slopes: Vec<f64> = if u_values.len() == 1 {
        d_n_values.clone()
    } else {
        (1..u_values.len())
            .map(|i| (logs[i] - logs[0]) / (u_values[0] - u_values[i]))
            .collect()
    };
    let half = chord_slopes.len() / 2;
    let t0_hat = chord_slopes[half..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    Ok(DimensionEstimate {
        z,
        u_values: u_values.to_vec(),
        lambda_mass,
        d_n_values,
        chord_slopes,
        t0_hat,
        hd_lower_bound: t0_hat.min(1.0),
        atom_flag: t0_hat < ATOM_THRESHOLD,
    })
}
