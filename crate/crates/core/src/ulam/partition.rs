use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval_maps::{Interval, OpenSystem, PiecewiseExpandingMap};

/// Breakpoints closer than this are treated as the same point.
const DEDUP_TOL: f64 = 1e-14;

/// Bin partition of `[0, 1)` used by the Ulam discretization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinPartition {
    breakpoints: Vec<f64>,
    /// Every branch image of every bin is a union of bins.
    pub markov: bool,
    pub hole_aligned: bool,
    pub branch_aligned: bool,
}

impl BinPartition {
    /// Partition with the given breakpoints (must start at 0 and end at 1).
    pub fn from_breakpoints(mut breakpoints: Vec<f64>) -> Result<Self> {
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        if breakpoints.len() < 2 || breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidInput(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        Ok(BinPartition {
            breakpoints,
            markov: false,
            hole_aligned: false,
            branch_aligned: false,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn bin(&self, i: usize) -> Interval {
        Interval {
            lo: self.breakpoints[i],
            hi: self.breakpoints[i + 1],
        }
    }

    #[inline]
    pub fn width(&self, i: usize) -> f64 {
        self.breakpoints[i + 1] - self.breakpoints[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.breakpoints.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Index of the bin containing `x` (the last bin holds 1).
    #[inline]
    pub fn locate(&self, x: f64) -> usize {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        idx.saturating_sub(1).min(self.len() - 1)
    }

    /// Bins meeting the half-open interval `[lo, hi)`.
    #[inline]
    pub fn overlapping(&self, lo: f64, hi: f64) -> Range<usize> {
        if hi <= lo {
            return 0..0;
        }
        let start = self.breakpoints.partition_point(|&b| b <= lo).saturating_sub(1);
        let end = self.breakpoints.partition_point(|&b| b < hi).min(self.len());
        start..end.max(start)
    }

    fn contains_point(sorted: &[f64], x: f64) -> bool {
        let idx = sorted.partition_point(|&b| b < x - DEDUP_TOL);
        sorted.get(idx).is_some_and(|&b| (b - x).abs() <= DEDUP_TOL)
    }

    /// Markov-aligned refinement that also contains `extra` points. The new
    /// points' forward orbits are added until closed; `None` when more than
    /// `cap` points would be needed.
    pub fn refine_with(
        &self,
        map: &PiecewiseExpandingMap,
        extra: &[f64],
        cap: usize,
    ) -> Option<BinPartition> {
        if !self.markov {
            return None;
        }
        let mut pts = self.breakpoints.clone();
        let seeds: Vec<f64> = extra
            .iter()
            .copied()
            .filter(|x| (0.0..=1.0).contains(x))
            .collect();
        let pts_limit = pts.len() + cap;
        forward_close(map, &mut pts, seeds, pts_limit)?;
        Some(BinPartition {
            breakpoints: pts,
            ..self.clone()
        })
    }
}

/// Inserts the forward orbits of `queue` into the sorted point set.
fn forward_close(
    map: &PiecewiseExpandingMap,
    pts: &mut Vec<f64>,
    mut queue: Vec<f64>,
    limit: usize,
) -> Option<()> {
    let insert = |pts: &mut Vec<f64>, x: f64| -> bool {
        if BinPartition::contains_point(pts, x) {
            return false;
        }
        let idx = pts.partition_point(|&b| b < x);
        pts.insert(idx, x);
        true
    };
    let seeds = std::mem::take(&mut queue);
    for x in seeds {
        if insert(pts, x) {
            queue.push(x);
        }
    }
    while let Some(p) = queue.pop() {
        for b in map.branches() {
            if p < b.domain.lo || p > b.domain.hi {
                continue;
            }
            let y = b.value(p).clamp(0.0, 1.0);
            if insert(pts, y) {
                if pts.len() > limit {
                    return None;
                }
                queue.push(y);
            }
        }
    }
    Some(())
}

/// `k` uniform bins plus every hole endpoint and branch boundary.
///
/// In Markov mode the breakpoints are closed under the forward images of
/// the branches, which makes the Ulam matrix exact for affine Markov maps.
pub fn build_partition(sys: &OpenSystem, k: usize, markov_mode: bool) -> Result<BinPartition> {
    build_partition_with_points(sys, k, markov_mode, &[])
}

pub fn build_partition_with_points(
    sys: &OpenSystem,
    k: usize,
    markov_mode: bool,
    extra: &[f64],
) -> Result<BinPartition> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 bins, got {k}")));
    }
    let map = sys.map();
    if markov_mode && !map.is_affine() {
        return Err(Error::UnsupportedMode {
            reason: "markov mode needs affine branches".into(),
        });
    }
    let mut pts: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    pts.extend(map.boundary_points());
    pts.extend(sys.hole().endpoints());
    pts.extend(extra.iter().copied().filter(|x| (0.0..=1.0).contains(x)));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
    *pts.first_mut().unwrap() = 0.0;
    *pts.last_mut().unwrap() = 1.0;

    if markov_mode {
        let queue = pts.clone();
        let limit = 4 * k + 50_000;
        let mut closed = Vec::with_capacity(pts.len());
        forward_close(map, &mut closed, queue, limit).ok_or_else(|| Error::UnsupportedMode {
            reason: format!(
                "forward images of the partition points do not close within {limit} points; the map with this hole is not Markov"
            ),
        })?;
        pts = closed;
    }
    Ok(BinPartition {
        breakpoints: pts,
        markov: markov_mode,
        hole_aligned: true,
        branch_aligned: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::IntervalSet;

    fn system(map: PiecewiseExpandingMap, lo: f64, hi: f64) -> OpenSystem {
        OpenSystem::new(map, IntervalSet::from_interval(Interval::new(lo, hi).unwrap())).unwrap()
    }

    #[test]
    fn dyadic_markov_partition() {
        let sys = system(PiecewiseExpandingMap::doubling(), 0.0, 0.25);
        let p = build_partition(&sys, 4, true).unwrap();
        assert_eq!(p.breakpoints(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(p.markov);
    }

    #[test]
    fn uniform_partition_gets_hole_endpoints() {
        let sys = system(PiecewiseExpandingMap::doubling(), 0.1, 0.2);
        let p = build_partition(&sys, 4096, false).unwrap();
        assert_eq!(p.len(), 4096 + 2);
        let tent = system(PiecewiseExpandingMap::tent(), 0.3, 0.35);
        let q = build_partition(&tent, 8, false).unwrap();
        for x in [0.3, 0.35, 0.5] {
            assert!(q.breakpoints().contains(&x));
        }
    }

    #[test]
    fn markov_closure_is_markov() {
        let sys = system(PiecewiseExpandingMap::doubling(), 0.0, 0.25);
        let p = build_partition(&sys, 5, true).unwrap();
        let map = sys.map();
        for i in 0..p.len() {
            let b = map.branch_at(p.bin(i).midpoint());
            let img = b.image_of(&p.bin(i));
            for y in [img.lo, img.hi] {
                assert!(BinPartition::contains_point(p.breakpoints(), y), "{y}");
            }
        }
    }

    #[test]
    fn non_uniform_grid_closes_under_rounding() {
        // Float orbits of i/5 land back on the grid up to rounding.
        let sys = system(PiecewiseExpandingMap::doubling(), 0.0, 0.2);
        let p = build_partition(&sys, 5, true).unwrap();
        assert!(p.len() < 64, "{}", p.len());
    }

    #[test]
    fn smooth_map_has_no_markov_mode() {
        let smooth = OpenSystem::closed(
            PiecewiseExpandingMap::new(vec![
                crate::interval_maps::Branch::smooth(
                    Interval::new(0.0, 0.5).unwrap(),
                    |x| 2.5 * x - x * x,
                    |x| 2.5 - 2.0 * x,
                ),
                crate::interval_maps::Branch::affine(Interval::new(0.5, 1.0).unwrap(), 2.0, -1.0),
            ])
            .unwrap(),
        );
        assert!(matches!(
            build_partition(&smooth, 8, true),
            Err(Error::UnsupportedMode { .. })
        ));
    }

    #[test]
    fn locate_and_overlap() {
        let p = BinPartition::from_breakpoints(vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(p.locate(0.0), 0);
        assert_eq!(p.locate(0.25), 1);
        assert_eq!(p.locate(1.0), 2);
        assert_eq!(p.overlapping(0.25, 0.5), 1..2);
        assert_eq!(p.overlapping(0.2, 0.6), 0..3);
    }
}
