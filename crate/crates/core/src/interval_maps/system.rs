use serde::Serialize;

use super::interval::IntervalSet;
use super::map::PiecewiseExpandingMap;
use crate::error::{Error, Result};

pub const DEFAULT_P_MAX: usize = 16;
pub const DEFAULT_PERIOD_TOL: f64 = 1e-9;
pub const DEFAULT_N_CHECK: usize = 64;

/// A map together with an absorbing hole `H` and its complement `X0`.
#[derive(Debug, Clone)]
pub struct OpenSystem {
    map: PiecewiseExpandingMap,
    hole: IntervalSet,
    x0: IntervalSet,
}

impl OpenSystem {
    /// Requires `0 < m(H) < 1`.
    pub fn new(map: PiecewiseExpandingMap, hole: IntervalSet) -> Result<Self> {
        let m = hole.measure();
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::InvalidInput(format!(
                "hole measure must lie in (0, 1), got {m}"
            )));
        }
        if hole.hull().is_some_and(|(lo, hi)| lo < 0.0 || hi > 1.0) {
            return Err(Error::InvalidInput("hole must lie inside [0, 1]".into()));
        }
        let x0 = hole.complement();
        Ok(OpenSystem { map, hole, x0 })
    }

    /// The closed system (empty hole). Used as a control: `alpha = 1`.
    pub fn closed(map: PiecewiseExpandingMap) -> Self {
        OpenSystem {
            map,
            hole: IntervalSet::empty(),
            x0: IntervalSet::unit(),
        }
    }

    pub fn map(&self) -> &PiecewiseExpandingMap {
        &self.map
    }

    pub fn hole(&self) -> &IntervalSet {
        &self.hole
    }

    pub fn x0(&self) -> &IntervalSet {
        &self.x0
    }

    pub fn is_closed(&self) -> bool {
        self.hole.is_empty()
    }

    #[inline]
    pub fn in_hole(&self, x: f64) -> bool {
        !self.hole.is_empty() && self.hole.contains(x)
    }

    /// `X_n = X0 ∩ T^{-1} X0 ∩ ... ∩ T^{-n} X0`, built as `X0 ∩ T^{-1} X_{n-1}`.
    pub fn survivor_approx(&self, n: usize) -> Result<IntervalSet> {
        let mut xn = self.x0.clone();
        for _ in 0..n {
            xn = self.x0.intersect(&self.map.preimage_set(&xn)?);
        }
        Ok(xn)
    }

    /// All of `X_0, ..., X_n` (index = order).
    pub fn survivor_sequence(&self, n: usize) -> Result<Vec<IntervalSet>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.x0.clone());
        for _ in 0..n {
            let prev = out.last().unwrap();
            out.push(self.x0.intersect(&self.map.preimage_set(prev)?));
        }
        Ok(out)
    }
}

/// Which limit law applies at a target point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetClass {
    Periodic { p: usize },
    Nonperiodic,
    OffSurvivor,
}

impl TargetClass {
    pub fn label(&self) -> String {
        match self {
            TargetClass::Periodic { p } => format!("periodic({p})"),
            TargetClass::Nonperiodic => "nonperiodic".into(),
            TargetClass::OffSurvivor => "off_survivor".into(),
        }
    }

    pub fn on_survivor(&self) -> bool {
        !matches!(self, TargetClass::OffSurvivor)
    }
}

/// Classified target point with the detection parameters that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetSpec {
    pub z: f64,
    pub class: TargetClass,
    pub tol: f64,
    pub p_max: usize,
    /// Number of forward steps for which survival was verified. For a
    /// periodic target this is `n_check` (the orbit repeats); for a
    /// nonperiodic one it can be smaller when the tolerance ball around `z`
    /// has been stretched beyond the margin to the hole.
    pub depth_checked: usize,
}

/// Decides whether `z` is periodic on the survivor set, nonperiodic on it,
/// or off it.
///
/// `z` is treated as known to within `tol`: the orbit is followed while the
/// image of the `tol`-ball around `z` stays inside `X0` and away from branch
/// boundaries. Points of the hole, or orbits that provably enter it, are
/// `OffSurvivor`.
pub fn classify_target(
    sys: &OpenSystem,
    z: f64,
    p_max: usize,
    n_check: usize,
    tol: f64,
) -> Result<TargetSpec> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain { name: "z", value: z });
    }
    let map = sys.map();
    let bounds = map.interior_boundaries();
    let near_boundary =
        |x: f64, margin: f64| bounds.iter().any(|b| (b - x).abs() <= margin);
    if near_boundary(z, tol) {
        return Err(Error::AmbiguousPoint { x: z, tol });
    }
    let spec = |class, depth_checked| TargetSpec {
        z,
        class,
        tol,
        p_max,
        depth_checked,
    };
    if sys.in_hole(z) {
        return Ok(spec(TargetClass::OffSurvivor, 0));
    }

    let hole_edges = sys.hole().endpoints();
    let hole_margin = |x: f64| {
        hole_edges
            .iter()
            .map(|e| (e - x).abs())
            .fold(f64::INFINITY, f64::min)
    };

    let mut x = z;
    // Radius of the image of the tol-ball around z.
    let mut spread = tol;
    for step in 1..=n_check {
        spread *= map.branch_at(x).derivative(x).abs();
        x = map.evaluate(x);
        if step <= p_max && (x - z).abs() <= tol {
            return Ok(spec(TargetClass::Periodic { p: step }, n_check));
        }
        if sys.in_hole(x) {
            if hole_margin(x) > spread {
                return Ok(spec(TargetClass::OffSurvivor, step));
            }
            return Ok(spec(TargetClass::Nonperiodic, step - 1));
        }
        if hole_margin(x) <= spread || near_boundary(x, spread) {
            // The tol-ball is no longer resolved; the orbit is verified up to here.
            if step <= p_max && near_boundary(x, tol) {
                return Err(Error::AmbiguousPoint { x: z, tol });
            }
            return Ok(spec(TargetClass::Nonperiodic, step - 1));
        }
    }
    Ok(spec(TargetClass::Nonperiodic, n_check))
}
