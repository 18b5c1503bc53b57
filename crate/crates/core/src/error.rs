use thiserror::Error;

/// Every recoverable failure the library can report.
///
/// Each variant carries the offending parameter so that the runner can echo
/// it into the run manifest; [`Error::name`] and [`Error::module`] give the
/// stable machine-readable identifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {x} lies on (or within {tol} of) a discontinuity of the map; the continuity assumption is violated")]
    AmbiguousPoint { x: f64, tol: f64 },

    #[error("markov mode is unsupported for this map: {reason}")]
    UnsupportedMode { reason: String },

    #[error("discretization failed to reach tolerance {tol} (residual {residual})")]
    DiscretizationTolerance { tol: f64, residual: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("density weights are all zero")]
    EmptyDensity,

    #[error("only {usable} time points with enough survivors (need at least 3)")]
    InsufficientSurvivors { usable: usize },

    #[error("horizon {horizon} is infeasible: expected {expected:.1} survivors, need at least {required}")]
    InfeasibleHorizon {
        horizon: usize,
        expected: f64,
        required: usize,
    },

    #[error("argument {name} = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },

    #[error("extremal index formula requires alpha^p |(T^p)'(z)| > 1, got {value}")]
    FormulaDomain { value: f64 },

    #[error("target {z} carries no invariant mass at radius {radius}")]
    OffSupport { z: f64, radius: f64 },

    #[error("target {z} was classified on the survivor set but its ball of radius {radius} has zero mass")]
    InconsistentClassification { z: f64, radius: f64 },

    #[error("ball of radius {radius} around {z} contains a branch boundary")]
    BallTooLarge { z: f64, radius: f64 },

    #[error("no qualifying data: {reason}")]
    InsufficientData { reason: String },

    #[error("sample of size {n} is degenerate (all values equal)")]
    DegenerateSample { n: usize },

    #[error("target classification mismatch: expected {expected}, found {found}")]
    ClassificationMismatch {
        expected: &'static str,
        found: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable snake_case error name.
    pub fn name(&self) -> &'static str {
        match self {
            Error::AmbiguousPoint { .. } => "ambiguous_point",
            Error::UnsupportedMode { .. } => "unsupported_mode",
            Error::DiscretizationTolerance { .. } => "discretization_tolerance",
            Error::Convergence { .. } => "convergence",
            Error::EmptyDensity => "empty_density",
            Error::InsufficientSurvivors { .. } => "insufficient_survivors",
            Error::InfeasibleHorizon { .. } => "infeasible_horizon",
            Error::Domain { .. } => "domain",
            Error::FormulaDomain { .. } => "formula_domain",
            Error::OffSupport { .. } => "off_support",
            Error::InconsistentClassification { .. } => "inconsistent_classification",
            Error::BallTooLarge { .. } => "ball_too_large",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::DegenerateSample { .. } => "degenerate_sample",
            Error::ClassificationMismatch { .. } => "classification_mismatch",
            Error::InvalidInput(_) => "invalid_input",
        }
    }

    /// The offending parameter as `name=value`.
    pub fn parameter(&self) -> String {
        match self {
            Error::AmbiguousPoint { x, .. } => format!("z={x}"),
            Error::UnsupportedMode { .. } => "markov_mode=true".into(),
            Error::DiscretizationTolerance { tol, .. } => format!("tol={tol}"),
            Error::Convergence { iterations, .. } => format!("iterations={iterations}"),
            Error::EmptyDensity => "hole".into(),
            Error::InsufficientSurvivors { usable } => format!("usable_times={usable}"),
            Error::InfeasibleHorizon { horizon, .. } => format!("horizon={horizon}"),
            Error::Domain { name, value } => format!("{name}={value}"),
            Error::FormulaDomain { value } => format!("alpha_p_deriv={value}"),
            Error::OffSupport { z, .. }
            | Error::InconsistentClassification { z, .. }
            | Error::BallTooLarge { z, .. } => format!("z={z}"),
            Error::InsufficientData { .. } => "sample".into(),
            Error::DegenerateSample { n } => format!("sample_size={n}"),
            Error::ClassificationMismatch { found, .. } => format!("classification={found}"),
            Error::InvalidInput(_) => "input".into(),
        }
    }

    /// The library module that raises this error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::AmbiguousPoint { .. } | Error::InvalidInput(_) => "interval_maps",
            Error::UnsupportedMode { .. }
            | Error::DiscretizationTolerance { .. }
            | Error::Convergence { .. }
            | Error::InconsistentClassification { .. } => "ulam",
            Error::EmptyDensity
            | Error::InsufficientSurvivors { .. }
            | Error::InfeasibleHorizon { .. }
            | Error::Domain { .. } => "open_dynamics",
            Error::FormulaDomain { .. }
            | Error::OffSupport { .. }
            | Error::BallTooLarge { .. }
            | Error::ClassificationMismatch { .. } => "extremes",
            Error::InsufficientData { .. } | Error::DegenerateSample { .. } => "gev_fit",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
