use openevt_core::extremes::{degenerate_probe, distance_estimate, DegenerateProbe};

use super::{Context, Recorder};
use crate::error::CliResult;
use crate::output::{fmt_f64, fmt_opt, write_csv};

/// `degenerate.csv` (n, radius, lambda_n, p_op) and `distance.csv` (n_hat,
/// estimate, exact).
pub fn run_degenerate(ctx: &Context, rec: &mut Recorder) -> CliResult<DegenerateProbe> {
    let cfg = &ctx.cfg;
    let probe = degenerate_probe(
        &ctx.sys,
        &ctx.sol,
        &ctx.spec,
        &cfg.n_values,
        cfg.options.survivor_depth,
    )?;
    let rows: Vec<Vec<String>> = (0..probe.n_values.len())
        .map(|i| {
            let n = probe.n_values[i];
            vec![
                n.to_string(),
                fmt_f64(1.0 / n as f64),
                fmt_f64(probe.lambda_n[i]),
                fmt_f64(probe.curve[i]),
            ]
        })
        .collect();
    let dir = &ctx.out_dir;
    rec.file(
        "degenerate",
        write_csv(dir, "degenerate.csv", &["n", "radius", "lambda_n", "p_op"], &rows)?,
    );
    let d = distance_estimate(&probe);
    let row = vec![vec![
        d.n_hat.map(|n| n.to_string()).unwrap_or_default(),
        fmt_opt(d.estimate),
        fmt_f64(d.exact),
    ]];
    rec.file(
        "degenerate",
        write_csv(dir, "distance.csv", &["n_hat", "estimate", "exact"], &row)?,
    );
    if d.n_hat.is_none() {
        rec.warn(
            "no_separation",
            "extremes",
            format!("z={}", cfg.z),
            "z is not separated from the survivor approximation",
        );
    }
    rec.result("degenerate", &probe);
    rec.result("distance", d);
    Ok(probe)
}
