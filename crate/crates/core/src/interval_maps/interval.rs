use serde::{Deserialize, Serialize};

/// Half-open subinterval `[lo, hi)` of the unit interval.
///
/// The point 1 is identified with the limit from the left, so `[a, 1)` is
/// treated as closed at 1 wherever membership matters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Returns `None` when the interval would be empty (`lo >= hi`).
    pub fn new(lo: f64, hi: f64) -> Option<Self> {
        if lo < hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    pub fn unit() -> Self {
        Interval { lo: 0.0, hi: 1.0 }
    }

    /// Open ball `(center - radius, center + radius)` clipped to `[0, 1]`.
    pub fn ball(center: f64, radius: f64) -> Option<Self> {
        Interval::new((center - radius).max(0.0), (center + radius).min(1.0))
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo <= x && x < self.hi) || (x == 1.0 && self.hi == 1.0)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Finite disjoint union of half-open intervals, kept sorted with touching
/// components merged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IntervalSet {
    components: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn unit() -> Self {
        IntervalSet {
            components: vec![Interval::unit()],
        }
    }

    pub fn from_interval(iv: Interval) -> Self {
        IntervalSet {
            components: vec![iv],
        }
    }

    /// Builds a normalized set from arbitrary (possibly overlapping) pieces.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(pieces: I) -> Self {
        let mut v: Vec<Interval> = pieces.into_iter().filter(|iv| iv.lo < iv.hi).collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        IntervalSet { components: out }
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.components.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.components.partition_point(|iv| iv.hi <= x);
        if let Some(iv) = self.components.get(idx) {
            if iv.contains(x) {
                return true;
            }
        }
        x == 1.0 && self.components.last().is_some_and(|iv| iv.hi == 1.0)
    }

    /// Distance from `x` to the set; zero when `x` is a member.
    pub fn distance(&self, x: f64) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        let idx = self.components.partition_point(|iv| iv.hi <= x);
        let mut d = f64::INFINITY;
        if idx > 0 {
            d = d.min(x - self.components[idx - 1].hi);
        }
        if let Some(iv) = self.components.get(idx) {
            d = d.min(iv.lo - x);
        }
        d
    }

    /// True iff the open interval `(lo, hi)` misses the set.
    pub fn disjoint_from_open(&self, lo: f64, hi: f64) -> bool {
        !self.components.iter().any(|iv| iv.lo < hi && lo < iv.hi)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(
            self.components
                .iter()
                .chain(other.components.iter())
                .copied(),
        )
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.components, &other.components);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if let Some(iv) = a[i].intersect(&b[j]) {
                out.push(iv);
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::from_intervals(out)
    }

    pub fn intersect_interval(&self, iv: &Interval) -> IntervalSet {
        let start = self.components.partition_point(|c| c.hi <= iv.lo);
        let pieces = self.components[start..]
            .iter()
            .take_while(|c| c.lo < iv.hi)
            .filter_map(|c| c.intersect(iv));
        IntervalSet {
            components: pieces.collect(),
        }
    }

    /// Complement within `[0, 1)`.
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.components.len() + 1);
        let mut cursor = 0.0;
        for iv in &self.components {
            if let Some(gap) = Interval::new(cursor, iv.lo) {
                out.push(gap);
            }
            cursor = iv.hi;
        }
        if let Some(gap) = Interval::new(cursor, 1.0) {
            out.push(gap);
        }
        IntervalSet { components: out }
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.intersect(&other.complement())
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        let inter = self.intersect(other);
        inter == *self
    }

    /// Smallest and largest points of the closure, if nonempty.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.components.first()?.lo, self.components.last()?.hi))
    }

    /// All component endpoints, sorted.
    pub fn endpoints(&self) -> Vec<f64> {
        self.components.iter().flat_map(|iv| [iv.lo, iv.hi]).collect()
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalSet::from_intervals(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn normalizes_overlaps_and_touching() {
        let s = IntervalSet::from_intervals([iv(0.5, 0.75), iv(0.0, 0.25), iv(0.25, 0.3), iv(0.7, 0.8)]);
        assert_eq!(s.components(), &[iv(0.0, 0.3), iv(0.5, 0.8)]);
        assert!((s.measure() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn complement_and_membership() {
        let s = IntervalSet::from_intervals([iv(0.0, 0.25), iv(0.5, 1.0)]);
        let c = s.complement();
        assert_eq!(c.components(), &[iv(0.25, 0.5)]);
        assert!(s.contains(1.0));
        assert!(s.contains(0.0));
        assert!(!s.contains(0.25));
        assert!(c.contains(0.25));
        assert!((s.measure() + c.measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distance_to_components() {
        let s = IntervalSet::from_intervals([iv(0.25, 0.5), iv(0.625, 1.0)]);
        assert!((s.distance(0.1) - 0.15).abs() < 1e-15);
        assert_eq!(s.distance(0.3), 0.0);
        assert!((s.distance(0.55) - 0.05).abs() < 1e-15);
        assert!(s.disjoint_from_open(0.5, 0.625));
        assert!(!s.disjoint_from_open(0.45, 0.626));
    }

    #[test]
    fn empty_ball_is_none() {
        assert!(Interval::new(0.3, 0.3).is_none());
        assert_eq!(Interval::ball(0.1, 0.2).unwrap(), iv(0.0, 0.30000000000000004));
    }
}
