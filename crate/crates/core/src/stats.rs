//! Small regression helpers shared by the estimators.

/// Ordinary least squares line with residual-based standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// NaN with fewer than three points.
    pub slope_se: f64,
    pub intercept_se: f64,
}

/// Fits `y = intercept + slope x`. Needs two distinct `x` values.
pub fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let xbar = x.iter().sum::<f64>() / nf;
    let ybar = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - xbar).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xbar) * (b - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let (slope_se, intercept_se) = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        let s2 = rss / (nf - 2.0);
        (
            (s2 / sxx).sqrt(),
            (s2 * (1.0 / nf + xbar * xbar / sxx)).sqrt(),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Some(LineFit {
        slope,
        intercept,
        slope_se,
        intercept_se,
    })
}

/// Linear estimator `c . y` and its standard deviation `sqrt(c' Σ c)` for a
/// given covariance matrix of `y`.
pub fn linear_combination(c: &[f64], y: &[f64], cov: &[Vec<f64>]) -> (f64, f64) {
    let value = c.iter().zip(y).map(|(a, b)| a * b).sum();
    let mut var = 0.0;
    for (i, ci) in c.iter().enumerate() {
        for (j, cj) in c.iter().enumerate() {
            var += ci * cj * cov[i][j];
        }
    }
    (value, var.max(0.0).sqrt())
}

/// Coefficients `c` with `slope = c . y` for least squares through the
/// origin.
pub fn origin_slope_coeffs(x: &[f64]) -> Vec<f64> {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    x.iter().map(|v| v / sxx).collect()
}

/// Coefficients for the OLS slope and intercept.
pub fn ols_coeffs(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nf = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - xbar).powi(2)).sum();
    let slope: Vec<f64> = x.iter().map(|v| (v - xbar) / sxx).collect();
    let intercept = slope.iter().map(|c| 1.0 / nf - xbar * c).collect();
    (slope, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 + 2.0 * v).collect();
        let f = ols(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 0.5).abs() < 1e-12);
        assert!(f.slope_se < 1e-12);
        let (cs, ci) = ols_coeffs(&x);
        let id = vec![vec![0.0; 4]; 4];
        assert!((linear_combination(&cs, &y, &id).0 - 2.0).abs() < 1e-12);
        assert!((linear_combination(&ci, &y, &id).0 - 0.5).abs() < 1e-12);
        let c0 = origin_slope_coeffs(&x);
        let through: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        assert!((linear_combination(&c0, &through, &id).0 - 3.0).abs() < 1e-12);
    }
}
