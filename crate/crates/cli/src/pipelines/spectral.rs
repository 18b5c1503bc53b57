use openevt_core::open_dynamics::{alpha_from_ensemble, escape_rate, run_ensemble};
use openevt_core::ulam::{check_hole_smallness, h0_integral};
use serde::Serialize;

use super::{Context, Recorder};
use crate::error::CliResult;
use crate::output::{fmt_f64, write_csv};

#[derive(Debug, Clone, Serialize)]
struct SpectralSummary {
    alpha: f64,
    escape_rate: f64,
    lambda2_abs: f64,
    gap: f64,
    h_minus: f64,
    h0_integral: f64,
    exact: bool,
    hole_smallness: bool,
    alpha_mc: Option<f64>,
    alpha_mc_stderr: Option<f64>,
}

/// `spectral.csv` (quantity, value), `bins.csv` (lo, hi, h0, mu0,
/// lambda_weight) and `survival.csv` (step, survivors).
pub fn run_spectral(ctx: &Context, rec: &mut Recorder) -> CliResult<()> {
    let (cfg, sys, sol) = (&ctx.cfg, &ctx.sys, &ctx.sol);
    let ens = run_ensemble(sys, sol, cfg.n_particles, cfg.options.mc_horizon, cfg.seed)?;
    let mc = match alpha_from_ensemble(&ens) {
        Ok(a) => Some(a),
        Err(e) => {
            rec.warn_error(&e.into());
            None
        }
    };
    let s = SpectralSummary {
        alpha: sol.alpha,
        escape_rate: escape_rate(sol.alpha)?,
        lambda2_abs: sol.lambda2_abs,
        gap: sol.gap,
        h_minus: sol.h_minus,
        h0_integral: h0_integral(sol),
        exact: sol.exact,
        hole_smallness: check_hole_smallness(sol, sys.map().beta(), cfg.d_const),
        alpha_mc: mc.map(|a| a.alpha_hat),
        alpha_mc_stderr: mc.map(|a| a.stderr),
    };
    let mut rows = vec![
        vec!["alpha".into(), fmt_f64(s.alpha)],
        vec!["escape_rate".into(), fmt_f64(s.escape_rate)],
        vec!["lambda2_abs".into(), fmt_f64(s.lambda2_abs)],
        vec!["gap".into(), fmt_f64(s.gap)],
        vec!["h_minus".into(), fmt_f64(s.h_minus)],
        vec!["h0_integral".into(), fmt_f64(s.h0_integral)],
    ];
    if let Some(a) = mc {
        rows.push(vec!["alpha_mc".into(), fmt_f64(a.alpha_hat)]);
        rows.push(vec!["alpha_mc_stderr".into(), fmt_f64(a.stderr)]);
    }
    let dir = &ctx.out_dir;
    rec.file("spectral", write_csv(dir, "spectral.csv", &["quantity", "value"], &rows)?);
    let p = &sol.partition;
    let bins: Vec<Vec<String>> = (0..p.len())
        .map(|i| {
            let b = p.bin(i);
            vec![
                fmt_f64(b.lo),
                fmt_f64(b.hi),
                fmt_f64(sol.h0[i]),
                fmt_f64(sol.mu0[i]),
                fmt_f64(sol.lambda_weights[i]),
            ]
        })
        .collect();
    rec.file(
        "spectral",
        write_csv(dir, "bins.csv", &["lo", "hi", "h0", "mu0", "lambda_weight"], &bins)?,
    );
    let surv: Vec<Vec<String>> = ens
        .survivors
        .iter()
        .enumerate()
        .map(|(t, s)| vec![t.to_string(), s.to_string()])
        .collect();
    rec.file("spectral", write_csv(dir, "survival.csv", &["step", "survivors"], &surv)?);
    if !s.hole_smallness {
        rec.warn(
            "hole_smallness",
            "ulam",
            "hole",
            format!("alpha = {} <= d_const/beta = {}", s.alpha, cfg.d_const / sys.map().beta()),
        );
    }
    rec.result("spectral", s);
    Ok(())
}
