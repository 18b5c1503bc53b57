use serde::Serialize;

use super::empirical::ConditionedEnsemble;
use crate::error::{Error, Result};
use crate::interval_maps::{TargetClass, TargetSpec};
use crate::stats::{linear_combination, ols, ols_coeffs, origin_slope_coeffs};
use crate::ulam::PerturbedSpectrum;

/// Closed-form extremal index: `1 - 1/(α^p |(T^p)'(z)|)` at a periodic
/// point, 1 at a nonperiodic one, `None` off the survivor set.
pub fn theta_formula(spec: &TargetSpec, alpha: f64, deriv_p: f64) -> Result<Option<f64>> {
    match spec.class {
        TargetClass::Periodic { p } => {
            let value = alpha.powi(p as i32) * deriv_p.abs();
            if !(value > 1.0) {
                return Err(Error::FormulaDomain { value });
            }
            Ok(Some(1.0 - 1.0 / value))
        }
        TargetClass::Nonperiodic => Ok(Some(1.0)),
        TargetClass::OffSurvivor => Ok(None),
    }
}

/// An estimate with its uncertainty (standard error where one is defined).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Spectral estimator: the slopes `(α - λ_n)/Δ_n` are regressed on `Δ_n`
/// and extrapolated to `Δ = 0`. The error is the intercept's standard
/// error, or the spread of the slopes when there are only two points.
pub fn theta_spectral(spectrum: &PerturbedSpectrum) -> Result<Estimate> {
    let (x, y): (Vec<f64>, Vec<f64>) = spectrum
        .delta_n
        .iter()
        .zip(&spectrum.slope_estimates)
        .filter(|(d, s)| **d > 0.0 && s.is_finite())
        .map(|(d, s)| (*d, *s))
        .unzip();
    match x.len() {
        0 => Err(Error::InsufficientData {
            reason: "no radius with positive ball mass".into(),
        }),
        1 => Ok(Estimate {
            value: y[0],
            error: f64::NAN,
        }),
        _ => {
            let fit = ols(&x, &y).ok_or_else(|| Error::InsufficientData {
                reason: "ball masses do not vary".into(),
            })?;
            let error = if fit.intercept_se.is_finite() {
                fit.intercept_se
            } else {
                (y[0] - y[1]).abs()
            };
            Ok(Estimate {
                value: fit.intercept,
                error,
            })
        }
    }
}

/// Fit of the Monte Carlo extreme value law over a `τ` grid at fixed `n`.
#[derive(Debug, Clone, Serialize)]
pub struct GumbelFit {
    pub n: usize,
    pub taus: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub survivors: u64,
    /// `θ` from `y_τ = n (1 - P̂^{1/n}) ≈ θ τ`, least squares through the
    /// origin. The finite-`n` law is `(1 - θ τ / n)^n`, so this removes the
    /// `O(τ²/n)` bias of `-log P̂`.
    pub theta: Estimate,
    /// Plain regression of `-log P̂` on `τ`: slope and intercept. The
    /// Gumbel form predicts slope `θ` and intercept 0.
    pub raw_slope: Estimate,
    pub raw_intercept: Estimate,
}

/// Gumbel estimator of `θ` from one conditioned ensemble. `radii[i]` is
/// the boundary radius for `taus[i]` at the ensemble's `n`. Standard errors
/// use the multinomial covariance of the nested events `{min dist ≥ r}`.
pub fn theta_gumbel(ens: &ConditionedEnsemble, taus: &[f64], radii: &[f64]) -> Result<GumbelFit> {
    if taus.len() != radii.len() || taus.len() < 2 {
        return Err(Error::InsufficientData {
            reason: "need at least two tau values with radii".into(),
        });
    }
    let s = ens.survivors() as f64;
    let p: Vec<f64> = radii.iter().map(|r| ens.probability(-r.ln()).p).collect();
    if p.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::InsufficientData {
            reason: format!("empirical probabilities must lie strictly in (0, 1): {p:?}"),
        });
    }
    let k = taus.len();
    // Cov(P̂_a, P̂_b) = (min(P_a, P_b) - P_a P_b) / S for nested events.
    let cov_p: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| (p[a].min(p[b]) - p[a] * p[b]) / s).collect())
        .collect();
    let nf = ens.n as f64;
    let y_corr: Vec<f64> = p.iter().map(|v| nf * (1.0 - v.powf(1.0 / nf))).collect();
    let grad_corr: Vec<f64> = p.iter().map(|v| -v.powf(1.0 / nf - 1.0)).collect();
    let y_raw: Vec<f64> = p.iter().map(|v| -v.ln()).collect();
    let grad_raw: Vec<f64> = p.iter().map(|v| -1.0 / v).collect();
    let scale = |g: &[f64]| -> Vec<Vec<f64>> {
        (0..k)
            .map(|a| (0..k).map(|b| g[a] * g[b] * cov_p[a][b]).collect())
            .collect()
    };
    let (theta, theta_sd) = linear_combination(&origin_slope_coeffs(taus), &y_corr, &scale(&grad_corr));
    let (cs, ci) = ols_coeffs(taus);
    let cov_raw = scale(&grad_raw);
    let (slope, slope_sd) = linear_combination(&cs, &y_raw, &cov_raw);
    let (intercept, intercept_sd) = linear_combination(&ci, &y_raw, &cov_raw);
    Ok(GumbelFit {
        n: ens.n,
        taus: taus.to_vec(),
        p_hat: p,
        survivors: s as u64,
        theta: Estimate {
            value: theta,
            error: theta_sd,
        },
        raw_slope: Estimate {
            value: slope,
            error: slope_sd,
        },
        raw_intercept: Estimate {
            value: intercept,
            error: intercept_sd,
        },
    })
}

/// All available estimates of the extremal index for one target.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaEstimates {
    pub classification: TargetClass,
    pub theta_formula: Option<f64>,
    pub theta_spectral: Option<Estimate>,
    pub theta_return: Option<Estimate>,
    pub theta_gumbel: Option<Estimate>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(class: TargetClass) -> TargetSpec {
        TargetSpec {
            z: 0.0,
            class,
            tol: 1e-9,
            p_max: 16,
            depth_checked: 64,
        }
    }

    #[test]
    fn formula_cases() {
        let alpha = (1.0 + 5f64.sqrt()) / 4.0;
        let t = theta_formula(&spec(TargetClass::Periodic { p: 2 }), alpha, 4.0).unwrap().unwrap();
        assert!((t - 0.6180339887498949).abs() < 1e-12);
        let closed = theta_formula(&spec(TargetClass::Periodic { p: 2 }), 1.0, 4.0).unwrap();
        assert_eq!(closed, Some(0.75));
        assert_eq!(theta_formula(&spec(TargetClass::Nonperiodic), 0.5, 0.0).unwrap(), Some(1.0));
        assert_eq!(theta_formula(&spec(TargetClass::OffSurvivor), 0.5, 0.0).unwrap(), None);
        assert!(matches!(
            theta_formula(&spec(TargetClass::Periodic { p: 1 }), 0.4, 2.0),
            Err(Error::FormulaDomain { .. })
        ));
    }

    #[test]
    fn spectral_fit_extrapolates() {
        let s = PerturbedSpectrum {
            radii: vec![0.1, 0.05, 0.025],
            lambda_n: vec![0.0; 3],
            delta_n: vec![0.04, 0.02, 0.01],
            slope_estimates: vec![0.7, 0.65, 0.625],
            aligned: vec![true; 3],
        };
        let e = theta_spectral(&s).unwrap();
        assert!((e.value - 0.6).abs() < 1e-12);
    }
}
