//! Extreme value statistics for one-dimensional open dynamical systems.
//!
//! A piecewise-expanding map of the unit interval is given an absorbing hole.
//! The crate discretizes the transfer operators of the open system with
//! Ulam's method, extracts the escape rate and the conditionally invariant
//! density, and computes the extreme value law of the distance to a target
//! point: Gumbel with an extremal index below one at periodic targets, Gumbel
//! with index one at nonperiodic targets, and a degenerate law off the
//! survivor set.

pub mod error;
pub mod extremes;
pub mod gev_fit;
pub mod interval_maps;
pub mod open_dynamics;
pub mod stats;
pub mod ulam;

pub use error::{Error, Result};
pub use interval_maps::{
    classify_target, Interval, IntervalSet, OpenSystem, PiecewiseExpandingMap, TargetClass,
    TargetSpec,
};
pub use extremes::{BoundaryLevels, DegenerateProbe, ReturnRatios, ThetaEstimates};
pub use gev_fit::{DimensionEstimate, GevFit};
pub use open_dynamics::SurvivalEnsemble;
pub use ulam::{BinPartition, DiscretizedOperator, PerturbedSpectrum, SpectralSolution};
