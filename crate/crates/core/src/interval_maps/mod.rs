//! Piecewise-expanding interval maps, holes and survivor sets.
//!
//! Everything here is immutable after construction and can be shared freely
//! between worker threads.

mod interval;
mod map;
mod system;

pub use interval::{Interval, IntervalSet};
pub use map::{Branch, BranchForm, PiecewiseExpandingMap, ENDPOINT_TOL, ROOT_TOL};
pub use system::{
    classify_target, OpenSystem, TargetClass, TargetSpec, DEFAULT_N_CHECK, DEFAULT_P_MAX,
    DEFAULT_PERIOD_TOL,
};
