use std::sync::Arc;

use openevt_core::interval_maps::classify_target;
use openevt_core::open_dynamics::MIN_SURVIVORS;
use openevt_core::ulam::{build_partition, hole_smallness, spectral_solution};
use openevt_core::Error;
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Bins used by the dynamic checks.
const CHEAP_BINS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
    Fatal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub parameter: String,
    pub message: String,
}

impl Diagnostic {
    fn new(severity: Severity, code: &'static str, parameter: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity,
            code,
            parameter: parameter.into(),
            message: message.into(),
        }
    }
}

pub fn has_fatal(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Fatal)
}

/// Schema and invariant checks that need no computation.
pub fn static_checks(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    use Severity::Fatal;
    let mut out = Vec::new();
    let mut fatal = |code, param: &str, msg: String| out.push(Diagnostic::new(Fatal, code, param, msg));
    if let Err(e) = cfg.map.build() {
        fatal("invalid_map", "map", e.to_string());
    }
    let mut hole = cfg.hole.clone();
    hole.sort_by(|a, b| a[0].total_cmp(&b[0]));
    for [lo, hi] in &hole {
        if !(0.0 <= *lo && lo < hi && *hi <= 1.0) {
            fatal("invalid_hole", "hole", format!("interval [{lo}, {hi}) is not a nonempty subinterval of [0, 1]"));
        }
    }
    if hole.windows(2).any(|w| w[1][0] < w[0][1]) {
        fatal("invalid_hole", "hole", "hole intervals overlap".into());
    }
    let measure: f64 = hole.iter().map(|[lo, hi]| hi - lo).sum();
    if measure >= 1.0 {
        fatal("invalid_hole", "hole", format!("hole measure {measure} must be below 1"));
    }
    if !(0.0..=1.0).contains(&cfg.z) {
        fatal("invalid_target", "z", format!("z = {} is outside [0, 1]", cfg.z));
    }
    if cfg.tau.is_empty() || cfg.tau.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        fatal("invalid_tau", "tau", "tau grid must be nonempty and positive".into());
    }
    if cfg.n_values.is_empty() || cfg.n_values[0] == 0 || cfg.n_values.windows(2).any(|w| w[1] <= w[0]) {
        fatal("invalid_n_values", "n_values", "n_values must be positive and increasing".into());
    }
    if cfg.bins < 2 {
        fatal("invalid_bins", "bins", format!("bins = {} (need at least 2)", cfg.bins));
    }
    if cfg.n_particles == 0 {
        fatal("invalid_particles", "n_particles", "n_particles must be positive".into());
    }
    if cfg.p_max == 0 {
        fatal("invalid_p_max", "p_max", "p_max must be positive".into());
    }
    if !(cfg.d_const > 0.0) {
        fatal("invalid_d_const", "d_const", format!("d_const = {}", cfg.d_const));
    }
    let o = &cfg.options;
    if o.spectral_radii.iter().chain(&o.return_radii).any(|r| !(*r > 0.0)) {
        fatal("invalid_radii", "options.radii", "radii must be positive".into());
    }
    if o.dimension_u.is_empty() || o.dimension_u.windows(2).any(|w| w[1] <= w[0]) || o.dimension_u[0] <= 0.0 {
        fatal("invalid_dimension_u", "options.dimension_u", "levels must be positive and increasing".into());
    }
    if o.gev_n_values.iter().any(|n| *n < openevt_core::gev_fit::MIN_BLOCK_LEN) {
        fatal("invalid_block_len", "options.gev_n_values", "block lengths must be at least 16".into());
    }
    if o.gumbel_n == 0 {
        fatal("invalid_gumbel_n", "options.gumbel_n", "gumbel_n must be positive".into());
    }
    out
}

/// Static checks followed, when they pass, by checks on a cheap spectral
/// solve.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    use Severity::{Fatal, Info, Warning};
    let mut out = static_checks(cfg);
    if has_fatal(&out) {
        return out;
    }
    let sys = match cfg.system() {
        Ok(s) => s,
        Err(e) => {
            out.push(Diagnostic::new(Fatal, "invalid_system", "hole", e.to_string()));
            return out;
        }
    };
    match classify_target(&sys, cfg.z, cfg.p_max, cfg.options.classify_depth, cfg.options.classify_tol) {
        Err(e @ Error::AmbiguousPoint { .. }) => {
            out.push(Diagnostic::new(Fatal, "ambiguous_point", "z", e.to_string()));
            return out;
        }
        Err(e) => out.push(Diagnostic::new(Fatal, e.name(), "z", e.to_string())),
        Ok(spec) => out.push(Diagnostic::new(
            Info,
            "classification",
            "z",
            format!("target classified as {}", spec.class.label()),
        )),
    }
    if let Ok(d) = sys.map().singular_set_distance(cfg.z, cfg.p_max) {
        let sev = if d < 1e-9 { Warning } else { Info };
        out.push(Diagnostic::new(sev, "singular_set_distance", "z", format!("distance to the singular set up to order {}: {d}", cfg.p_max)));
    }
    let bins = cfg.bins.min(CHEAP_BINS);
    let sol = build_partition(&sys, bins, cfg.markov_mode)
        .and_then(|p| spectral_solution(&sys, &Arc::new(p)));
    let sol = match sol {
        Ok(s) => s,
        Err(e) => {
            out.push(Diagnostic::new(Warning, e.name(), e.parameter(), format!("spectral check at {bins} bins failed: {e}")));
            return out;
        }
    };
    let alpha = sol.alpha;
    let beta = sys.map().beta();
    let m_hole = sys.hole().measure();
    if m_hole > 0.0 {
        out.push(Diagnostic::new(
            Info,
            "escape_ratio",
            "hole",
            format!("1 - alpha = {} and m(H) = {m_hole}; observed ratio {} (informational)", 1.0 - alpha, (1.0 - alpha) / m_hole),
        ));
    }
    if hole_smallness(alpha, beta, cfg.d_const) {
        out.push(Diagnostic::new(Info, "hole_smallness", "hole", format!("alpha = {alpha} > d_const/beta = {}", cfg.d_const / beta)));
    } else {
        out.push(Diagnostic::new(
            Warning,
            "hole_smallness",
            "hole",
            format!("alpha = {alpha} <= d_const/beta = {}; theta is refused for periodic targets", cfg.d_const / beta),
        ));
    }
    let mut horizons = vec![("n_values", cfg.n_values.iter().copied().max().unwrap_or(1))];
    horizons.push(("options.gumbel_n", cfg.options.gumbel_n));
    for (param, n) in horizons {
        let expected = cfg.n_particles as f64 * alpha.powi(n as i32 - 1);
        if expected < MIN_SURVIVORS as f64 {
            out.push(Diagnostic::new(
                Warning,
                "infeasible_horizon",
                param,
                format!("n = {n}: expected {expected:.1} survivors of {} particles, need {MIN_SURVIVORS}", cfg.n_particles),
            ));
        }
    }
    let mc = cfg.n_particles as f64 * alpha.powi(cfg.options.mc_horizon as i32);
    if mc < MIN_SURVIVORS as f64 {
        out.push(Diagnostic::new(Warning, "infeasible_horizon", "options.mc_horizon", format!("expected {mc:.1} survivors at the escape-rate horizon")));
    }
    out
}
