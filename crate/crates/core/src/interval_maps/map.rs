use std::fmt;
use std::sync::Arc;

use super::interval::{Interval, IntervalSet};
use crate::error::{Error, Result};

/// Tolerance used when matching branch endpoints and Markov images.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Absolute tolerance for bracketed inversion of non-affine branches.
pub const ROOT_TOL: f64 = 1e-12;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How a branch acts on its domain.
#[derive(Clone)]
pub enum BranchForm {
    /// `x -> slope * x + offset`.
    Affine { slope: f64, offset: f64 },
    /// A C^1 monotone map given by its value and derivative.
    Smooth { value: RealFn, derivative: RealFn },
}

impl fmt::Debug for BranchForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchForm::Affine { slope, offset } => f
                .debug_struct("Affine")
                .field("slope", slope)
                .field("offset", offset)
                .finish(),
            BranchForm::Smooth { .. } => f.write_str("Smooth"),
        }
    }
}

/// One monotone, uniformly expanding piece of the map.
#[derive(Debug, Clone)]
pub struct Branch {
    pub domain: Interval,
    pub form: BranchForm,
    increasing: bool,
}

impl Branch {
    pub fn affine(domain: Interval, slope: f64, offset: f64) -> Self {
        Branch {
            domain,
            form: BranchForm::Affine { slope, offset },
            increasing: slope > 0.0,
        }
    }

    pub fn smooth<F, D>(domain: Interval, value: F, derivative: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let increasing = derivative(domain.midpoint()) > 0.0;
        Branch {
            domain,
            form: BranchForm::Smooth {
                value: Arc::new(value),
                derivative: Arc::new(derivative),
            },
            increasing,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.form, BranchForm::Affine { .. })
    }

    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    /// Branch formula evaluated at `x`; also valid at the closed endpoints.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match &self.form {
            BranchForm::Affine { slope, offset } => slope * x + offset,
            BranchForm::Smooth { value, .. } => value(x),
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.form {
            BranchForm::Affine { slope, .. } => *slope,
            BranchForm::Smooth { derivative, .. } => derivative(x),
        }
    }

    /// Infimum of |T'| over the domain (sampled for smooth branches).
    pub fn min_abs_derivative(&self) -> f64 {
        match &self.form {
            BranchForm::Affine { slope, .. } => slope.abs(),
            BranchForm::Smooth { derivative, .. } => (0..=256)
                .map(|i| {
                    let t = i as f64 / 256.0;
                    derivative(self.domain.lo + t * self.domain.len()).abs()
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Image of the closed domain as an interval.
    pub fn image(&self) -> Interval {
        self.image_of(&self.domain)
    }

    /// Image of a subinterval of the domain.
    pub fn image_of(&self, iv: &Interval) -> Interval {
        let (a, b) = (self.value(iv.lo), self.value(iv.hi));
        Interval {
            lo: a.min(b).clamp(0.0, 1.0),
            hi: a.max(b).clamp(0.0, 1.0),
        }
    }

    /// Point of the closed domain mapped to `y`, if `y` lies in the closed image.
    pub fn inverse_point(&self, y: f64) -> Result<Option<f64>> {
        let img = self.image();
        if y < img.lo - ENDPOINT_TOL || y > img.hi + ENDPOINT_TOL {
            return Ok(None);
        }
        let x = match &self.form {
            BranchForm::Affine { slope, offset } => ((y - offset) / slope)
                .clamp(self.domain.lo, self.domain.hi),
            BranchForm::Smooth { value, .. } => self.bisect(value.as_ref(), y)?,
        };
        Ok(Some(x))
    }

    fn bisect(&self, f: &(dyn Fn(f64) -> f64 + Send + Sync), y: f64) -> Result<f64> {
        let (mut lo, mut hi) = (self.domain.lo, self.domain.hi);
        let sign = if self.increasing { 1.0 } else { -1.0 };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sign * (f(mid) - y) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= ROOT_TOL {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(Error::DiscretizationTolerance {
            tol: ROOT_TOL,
            residual: hi - lo,
        })
    }

    /// Preimage of `target` inside this branch's domain.
    pub fn preimage_interval(&self, target: &Interval) -> Result<Option<Interval>> {
        let img = self.image();
        let Some(t) = target.intersect(&img) else {
            return Ok(None);
        };
        let (Some(a), Some(b)) = (self.inverse_point(t.lo)?, self.inverse_point(t.hi)?) else {
            return Ok(None);
        };
        Ok(Interval::new(a.min(b), a.max(b)).and_then(|iv| iv.intersect(&self.domain)))
    }
}

/// Piecewise-expanding interval map `T` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct PiecewiseExpandingMap {
    branches: Vec<Branch>,
    beta: f64,
    markov: bool,
    full_branch: bool,
}

impl PiecewiseExpandingMap {
    /// Validates coverage, expansion and computes the Markov flags.
    pub fn new(mut branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidInput("map has no branches".into()));
        }
        branches.sort_by(|a, b| a.domain.lo.total_cmp(&b.domain.lo));
        if branches[0].domain.lo.abs() > ENDPOINT_TOL
            || (branches.last().unwrap().domain.hi - 1.0).abs() > ENDPOINT_TOL
        {
            return Err(Error::InvalidInput("branch domains must cover [0, 1]".into()));
        }
        for w in branches.windows(2) {
            if (w[0].domain.hi - w[1].domain.lo).abs() > ENDPOINT_TOL {
                return Err(Error::InvalidInput(format!(
                    "branch domains leave a gap or overlap at {}",
                    w[0].domain.hi
                )));
            }
        }
        for b in &branches {
            let img = [b.value(b.domain.lo), b.value(b.domain.hi)];
            if img.iter().any(|y| *y < -ENDPOINT_TOL || *y > 1.0 + ENDPOINT_TOL) {
                return Err(Error::InvalidInput(format!(
                    "branch on [{}, {}) maps outside [0, 1]",
                    b.domain.lo, b.domain.hi
                )));
            }
        }
        let beta = branches
            .iter()
            .map(Branch::min_abs_derivative)
            .fold(f64::INFINITY, f64::min);
        if beta.is_nan() || beta <= 1.0 {
            return Err(Error::InvalidInput(format!(
                "map is not uniformly expanding (inf |T'| = {beta})"
            )));
        }
        let bounds: Vec<f64> = std::iter::once(0.0)
            .chain(branches.iter().map(|b| b.domain.hi))
            .collect();
        let on_boundary = |y: f64| bounds.iter().any(|p| (p - y).abs() <= ENDPOINT_TOL);
        let markov = branches.iter().all(|b| {
            let img = b.image();
            on_boundary(img.lo) && on_boundary(img.hi)
        });
        let full_branch = branches.iter().all(|b| {
            let img = b.image();
            img.lo.abs() <= ENDPOINT_TOL && (img.hi - 1.0).abs() <= ENDPOINT_TOL
        });
        Ok(PiecewiseExpandingMap {
            branches,
            beta,
            markov,
            full_branch,
        })
    }

    /// `T(x) = 2x mod 1`.
    pub fn doubling() -> Self {
        Self::linear_markov(&[2.0, 2.0]).expect("doubling map is valid")
    }

    /// Symmetric tent map with slopes ±2.
    pub fn tent() -> Self {
        let left = Interval { lo: 0.0, hi: 0.5 };
        let right = Interval { lo: 0.5, hi: 1.0 };
        Self::new(vec![
            Branch::affine(left, 2.0, 0.0),
            Branch::affine(right, -2.0, 2.0),
        ])
        .expect("tent map is valid")
    }

    /// Full increasing affine branches with the given slopes; the reciprocal
    /// slopes must sum to one.
    pub fn linear_markov(slopes: &[f64]) -> Result<Self> {
        let total: f64 = slopes.iter().map(|s| 1.0 / s).sum();
        if slopes.iter().any(|s| *s <= 1.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "linear_markov slopes must exceed 1 and have reciprocals summing to 1 (sum = {total})"
            )));
        }
        let mut lo = 0.0;
        let mut branches = Vec::with_capacity(slopes.len());
        for (i, &s) in slopes.iter().enumerate() {
            let hi = if i + 1 == slopes.len() { 1.0 } else { lo + 1.0 / s };
            branches.push(Branch::affine(Interval { lo, hi }, s, -s * lo));
            lo = hi;
        }
        Self::new(branches)
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// inf |T'| over the interval.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_markov(&self) -> bool {
        self.markov
    }

    pub fn is_full_branch(&self) -> bool {
        self.full_branch
    }

    pub fn is_affine(&self) -> bool {
        self.branches.iter().all(Branch::is_affine)
    }

    /// Branch endpoints in `(0, 1)`.
    pub fn interior_boundaries(&self) -> Vec<f64> {
        self.branches[1..].iter().map(|b| b.domain.lo).collect()
    }

    /// All branch endpoints, including 0 and 1.
    pub fn boundary_points(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.branches.iter().map(|b| b.domain.hi))
            .collect()
    }

    /// Index of the branch whose half-open domain contains `x`.
    #[inline]
    pub fn branch_index(&self, x: f64) -> usize {
        let idx = self.branches.partition_point(|b| b.domain.hi <= x);
        idx.min(self.branches.len() - 1)
    }

    pub fn branch_at(&self, x: f64) -> &Branch {
        &self.branches[self.branch_index(x)]
    }

    /// `T(x)` under the right-continuous convention at branch endpoints.
    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&x), "evaluate called with x = {x}");
        self.branch_at(x).value(x).clamp(0.0, 1.0)
    }

    fn check_unambiguous(&self, x: f64) -> Result<()> {
        if self.interior_boundaries().contains(&x) {
            Err(Error::AmbiguousPoint { x, tol: 0.0 })
        } else {
            Ok(())
        }
    }

    /// Signed `T'(x)`; an interior branch boundary is ambiguous.
    pub fn derivative_at(&self, x: f64) -> Result<f64> {
        self.check_unambiguous(x)?;
        Ok(self.branch_at(x).derivative(x))
    }

    /// `|(T^p)'(x)|` by the chain rule along the orbit.
    pub fn orbit_derivative(&self, x: f64, p: usize) -> Result<f64> {
        let mut y = x;
        let mut product = 1.0;
        for _ in 0..p {
            self.check_unambiguous(y)?;
            product *= self.branch_at(y).derivative(y).abs();
            y = self.evaluate(y);
        }
        Ok(product)
    }

    /// `T^{-1}(s)` as an interval set.
    pub fn preimage_set(&self, s: &IntervalSet) -> Result<IntervalSet> {
        let mut pieces = Vec::new();
        for b in &self.branches {
            let img = b.image();
            for c in s.intersect_interval(&img).components() {
                if let Some(iv) = b.preimage_interval(c)? {
                    pieces.push(iv);
                }
            }
        }
        Ok(IntervalSet::from_intervals(pieces))
    }

    /// Preimages of a single point, one per branch whose closed image holds it.
    pub fn preimage_points(&self, y: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            if let Some(x) = b.inverse_point(y)? {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Minimum distance from `z` to the discontinuity set of `T^depth`,
    /// i.e. to the preimages of order `< depth` of the branch endpoints.
    /// Depth 0 is treated like depth 1 (the endpoints themselves).
    pub fn singular_set_distance(&self, z: f64, depth: usize) -> Result<f64> {
        let mut level = self.boundary_points();
        let mut best = level.iter().map(|p| (p - z).abs()).fold(f64::INFINITY, f64::min);
        for _ in 1..depth.max(1) {
            let mut next = Vec::with_capacity(level.len() * self.branches.len());
            for &y in &level {
                next.extend(self.preimage_points(y)?);
            }
            next.sort_by(f64::total_cmp);
            next.dedup_by(|a, b| (*a - *b).abs() <= ENDPOINT_TOL);
            best = next.iter().map(|p| (p - z).abs()).fold(best, f64::min);
            level = next;
        }
        Ok(best)
    }
}
