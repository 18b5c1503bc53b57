use super::operator::DiscretizedOperator;
use crate::error::{Error, Result};

pub const EIG_TOL: f64 = 1e-12;
pub const EIG_MAX_ITER: usize = 100_000;

/// Leading eigendata of a (sub)stochastic Ulam matrix.
#[derive(Debug, Clone)]
pub struct LeadingEigs {
    /// Leading eigenvalue.
    pub lambda: f64,
    /// Left eigenvector as bin masses, summing to one.
    pub density: Vec<f64>,
    /// Right eigenvector as bin densities, normalized so `sum g_i w_i = 1`
    /// (up to rounding, unless the start vector was already an eigenvector).
    pub dual: Vec<f64>,
    pub iterations: usize,
}

fn weighted_sum(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Power iteration on the dual side. The eigenvalue is read off the stored
/// iterate: `lambda = sum (M g)_i w_i / sum g_i w_i`, which makes a warm
/// start from an exact eigenvector return that same eigenvalue bit for bit.
fn dual_iteration(
    op: &DiscretizedOperator,
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>, usize)> {
    let w = op.partition().widths();
    let mut g = start;
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        let mg = op.pull_back(&g);
        let mass = weighted_sum(&g, &w);
        let lambda = weighted_sum(&mg, &w) / mass;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Convergence {
                iterations: it,
                residual: f64::NAN,
            });
        }
        residual = mg
            .iter()
            .zip(&g)
            .zip(&w)
            .map(|((a, b), wi)| (a - lambda * b).abs() * wi)
            .sum::<f64>()
            / (lambda * mass);
        if residual <= tol {
            return Ok((lambda, g, it));
        }
        let norm = weighted_sum(&mg, &w);
        g = mg.into_iter().map(|v| v / norm).collect();
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}

fn density_iteration(
    op: &DiscretizedOperator,
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>, usize)> {
    let mut p = start;
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        let pm = op.push_forward(&p);
        let mass: f64 = p.iter().sum();
        let lambda = pm.iter().sum::<f64>() / mass;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Convergence {
                iterations: it,
                residual: f64::NAN,
            });
        }
        residual = pm
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - lambda * b).abs())
            .sum::<f64>()
            / (lambda * mass);
        if residual <= tol {
            return Ok((lambda, p.into_iter().map(|v| v / mass).collect(), it));
        }
        let norm: f64 = pm.iter().sum();
        p = pm.into_iter().map(|v| v / norm).collect();
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}

/// Leading eigenvalue with both eigenvectors, started from Lebesgue.
pub fn leading_eigs(op: &DiscretizedOperator, tol: f64, max_iter: usize) -> Result<LeadingEigs> {
    let w = op.partition().widths();
    leading_eigs_from(op, tol, max_iter, &w, &vec![1.0; w.len()])
}

/// As [`leading_eigs`] but warm-started from the given vectors.
pub fn leading_eigs_from(
    op: &DiscretizedOperator,
    tol: f64,
    max_iter: usize,
    density: &[f64],
    dual: &[f64],
) -> Result<LeadingEigs> {
    let w = op.partition().widths();
    let dual_mass = weighted_sum(dual, &w);
    if !(dual_mass > 0.0) {
        return Err(Error::EmptyDensity);
    }
    // The start vector is used as is so that an exact eigenvector is returned unchanged.
    let (lambda, g, it_g) = dual_iteration(op, dual.to_vec(), tol, max_iter)?;
    let p_mass: f64 = density.iter().sum();
    if !(p_mass > 0.0) {
        return Err(Error::EmptyDensity);
    }
    let (_, p, it_p) = density_iteration(op, density.to_vec(), tol, max_iter)?;
    Ok(LeadingEigs {
        lambda,
        density: p,
        dual: g,
        iterations: it_g.max(it_p),
    })
}

/// Modulus of the second eigenvalue by power iteration on the deflated
/// operator `q -> q M - lambda (q . g) h` with `h . g = 1`.
pub fn second_eigenvalue_modulus(op: &DiscretizedOperator, eigs: &LeadingEigs) -> f64 {
    let n = op.len();
    let hg: f64 = eigs.density.iter().zip(&eigs.dual).map(|(a, b)| a * b).sum();
    if !(hg > 0.0) {
        return 0.0;
    }
    let deflate = |q: &mut Vec<f64>| {
        let c: f64 = q.iter().zip(&eigs.dual).map(|(a, b)| a * b).sum::<f64>() / hg;
        for (qi, hi) in q.iter_mut().zip(&eigs.density) {
            *qi -= c * hi;
        }
    };
    // Deterministic, non-degenerate start.
    let mut q: Vec<f64> = (0..n)
        .map(|i| ((i as f64 + 1.0) * 0.618_033_988_749_895).fract() - 0.5)
        .collect();
    deflate(&mut q);
    let window = 20;
    let mut logs: Vec<f64> = Vec::new();
    for _ in 0..2000 {
        let mut next = op.push_forward(&q);
        deflate(&mut next);
        let s: f64 = next.iter().map(|v| v.abs()).sum();
        let prev: f64 = q.iter().map(|v| v.abs()).sum();
        if !(s > 0.0) || !(prev > 0.0) || s < 1e-300 {
            return 0.0;
        }
        logs.push((s / prev).ln());
        q = next.into_iter().map(|v| v / s).collect();
        if logs.len() >= 2 * window {
            let k = logs.len();
            let a: f64 = logs[k - window..].iter().sum::<f64>() / window as f64;
            let b: f64 = logs[k - 2 * window..k - window].iter().sum::<f64>() / window as f64;
            if (a - b).abs() < 1e-6 {
                return a.exp();
            }
        }
    }
    let k = logs.len();
    (logs[k - window..].iter().sum::<f64>() / window as f64).exp()
}
