//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use openevt_core::interval_maps::{Interval, IntervalSet, OpenSystem, PiecewiseExpandingMap};
use openevt_core::ulam::{build_partition, spectral_solution, SpectralSolution};

/// Doubling map with the hole `[0, 1/4)`.
pub fn golden_mean() -> OpenSystem {
    let hole = IntervalSet::from_interval(Interval::new(0.0, 0.25).expect("nonempty hole"));
    OpenSystem::new(PiecewiseExpandingMap::doubling(), hole).expect("valid system")
}

pub fn solve(sys: &OpenSystem, bins: usize, markov_mode: bool) -> SpectralSolution {
    let p = Arc::new(build_partition(sys, bins, markov_mode).expect("partition"));
    spectral_solution(sys, &p).expect("spectral solution")
}
