use openevt_core::extremes::{boundary_levels, conditioned_ensemble, degenerate_probe, EvdPoint};
use openevt_core::ulam::{evd_operator_curve, MeasureOracle};
use openevt_core::Error;
use serde::Serialize;

use super::{Context, Recorder};
use crate::error::CliResult;
use crate::output::{fmt_f64, write_csv};

/// Extreme value curve at one `τ`, from Monte Carlo and from the operator.
#[derive(Debug, Clone, Serialize)]
pub struct EvdRun {
    pub tau: f64,
    pub n_values: Vec<usize>,
    pub u_values: Vec<f64>,
    pub radii: Vec<f64>,
    /// `None` where the horizon is infeasible.
    pub mc_curve: Vec<Option<EvdPoint>>,
    pub op_curve: Vec<f64>,
    pub degenerate: bool,
    pub n_hat: Option<usize>,
    /// Largest `|p_mc - p_op| / stderr` over the feasible points.
    pub max_z_score: Option<f64>,
}

/// `evd_curve.csv` (n, u_n, radius, p_mc, stderr, p_op). Survivor targets
/// use the boundary levels at `τ`; other targets use `u_n = log n`.
pub fn run_evd(ctx: &Context, rec: &mut Recorder) -> CliResult<EvdRun> {
    let (cfg, sys, sol) = (&ctx.cfg, &ctx.sys, &ctx.sol);
    let z = cfg.z;
    let degenerate = !ctx.spec.class.on_survivor();
    let tau = cfg.curve_tau();
    let (u_values, radii, n_hat) = if degenerate {
        let probe = degenerate_probe(sys, sol, &ctx.spec, &cfg.n_values, cfg.options.survivor_depth)?;
        let u: Vec<f64> = cfg.n_values.iter().map(|n| (*n as f64).ln()).collect();
        let r: Vec<f64> = cfg.n_values.iter().map(|n| 1.0 / *n as f64).collect();
        (u, r, probe.n_hat)
    } else {
        let oracle = MeasureOracle::new(sys, sol);
        let levels = boundary_levels(&oracle, z, tau, &cfg.n_values)?;
        (levels.u_values, levels.radii, None)
    };
    let pairs: Vec<(usize, f64)> = cfg.n_values.iter().copied().zip(u_values.iter().copied()).collect();
    let op_curve = evd_operator_curve(sys, sol, z, &pairs)?;
    let mut mc_curve = Vec::with_capacity(pairs.len());
    for &(n, u) in &pairs {
        match conditioned_ensemble(sys, sol, z, n, cfg.n_particles, cfg.seed) {
            Ok(ens) => mc_curve.push(Some(ens.probability(u))),
            Err(e @ Error::InfeasibleHorizon { .. }) => {
                rec.warn_error(&e.into());
                mc_curve.push(None);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let max_z_score = mc_curve
        .iter()
        .zip(&op_curve)
        .filter_map(|(m, p)| m.map(|m| (m.p - p).abs() / m.stderr.max(1.0 / m.survivors as f64)))
        .reduce(f64::max);
    let rows: Vec<Vec<String>> = (0..pairs.len())
        .map(|i| {
            let (p_mc, se) = match mc_curve[i] {
                Some(m) => (fmt_f64(m.p), fmt_f64(m.stderr)),
                None => (String::new(), String::new()),
            };
            vec![
                cfg.n_values[i].to_string(),
                fmt_f64(u_values[i]),
                fmt_f64(radii[i]),
                p_mc,
                se,
                fmt_f64(op_curve[i]),
            ]
        })
        .collect();
    rec.file(
        "evd",
        write_csv(
            &ctx.out_dir,
            "evd_curve.csv",
            &["n", "u_n", "radius", "p_mc", "stderr", "p_op"],
            &rows,
        )?,
    );
    let run = EvdRun {
        tau,
        n_values: cfg.n_values.clone(),
        u_values,
        radii,
        mc_curve,
        op_curve,
        degenerate,
        n_hat,
        max_z_score,
    };
    rec.result("evd", &run);
    Ok(run)
}
