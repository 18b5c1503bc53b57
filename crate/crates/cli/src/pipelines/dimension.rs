use openevt_core::extremes::boundary_levels;
use openevt_core::gev_fit::{gev_by_block_length, local_dimension, normalizing_sequences};
use openevt_core::ulam::MeasureOracle;
use serde_json::json;

use super::{Context, Recorder};
use crate::error::CliResult;
use crate::output::{fmt_f64, write_csv};

/// Largest gap between the GEV `a_n` limit and `t0_hat` that is not flagged.
const CONCORDANCE_TOL: f64 = 0.1;

/// `dimension.csv` (u_n, lambda_mass, d_n, t0_hat) and `gev.csv` (n,
/// location, scale, shape, a_n, b_n).
pub fn run_dimension(ctx: &Context, rec: &mut Recorder) -> CliResult<()> {
    let (cfg, sys, sol) = (&ctx.cfg, &ctx.sys, &ctx.sol);
    let o = &cfg.options;
    let oracle = MeasureOracle::new(sys, sol);
    let dim = local_dimension(&oracle, cfg.z, &o.dimension_u)?;
    let rows: Vec<Vec<String>> = (0..dim.u_values.len())
        .map(|i| {
            vec![
                fmt_f64(dim.u_values[i]),
                fmt_f64(dim.lambda_mass[i]),
                fmt_f64(dim.d_n_values[i]),
                fmt_f64(dim.t0_hat),
            ]
        })
        .collect();
    let dir = &ctx.out_dir;
    rec.file(
        "dimension",
        write_csv(dir, "dimension.csv", &["u_n", "lambda_mass", "d_n", "t0_hat"], &rows)?,
    );
    if dim.atom_flag {
        rec.warn(
            "atomic_measure",
            "gev_fit",
            format!("z={}", cfg.z),
            format!("t0_hat = {} suggests an atom of Lambda at z", dim.t0_hat),
        );
    }
    let levels = boundary_levels(&oracle, cfg.z, cfg.curve_tau(), &cfg.n_values)?;
    let fdd = dim.fdd_bound(&levels.n_values);

    let fits = gev_by_block_length(sys, sol, cfg.z, &o.gev_n_values, o.gev_paths, cfg.seed)?;
    let seqs = normalizing_sequences(&fits, &o.gev_n_values)?;
    let rows: Vec<Vec<String>> = fits
        .iter()
        .enumerate()
        .map(|(i, f)| {
            vec![
                o.gev_n_values[i].to_string(),
                fmt_f64(f.location),
                fmt_f64(f.scale),
                fmt_f64(f.shape),
                fmt_f64(seqs.a_n[i]),
                fmt_f64(seqs.b_n[i]),
            ]
        })
        .collect();
    rec.file(
        "dimension",
        write_csv(dir, "gev.csv", &["n", "location", "scale", "shape", "a_n", "b_n"], &rows)?,
    );
    for (n, f) in o.gev_n_values.iter().zip(&fits) {
        if f.flagged {
            rec.warn(
                "gev_shape",
                "gev_fit",
                format!("n={n}"),
                format!("shape {} is outside the Gumbel domain tolerance", f.shape),
            );
        }
    }
    let a_limit = seqs.a_limit();
    let gap = a_limit.map(|a| (a - dim.t0_hat).abs());
    if gap.is_some_and(|g| g > CONCORDANCE_TOL) {
        rec.warn(
            "dimension_concordance",
            "gev_fit",
            "options.gev_n_values",
            format!("|a_n - t0_hat| = {} exceeds {CONCORDANCE_TOL}", gap.unwrap_or(f64::NAN)),
        );
    }
    rec.result(
        "dimension",
        json!({
            "t0_hat": dim.t0_hat,
            "hd_lower_bound": dim.hd_lower_bound,
            "atom_flag": dim.atom_flag,
            "fdd_bound": fdd,
            "a_limit": a_limit,
            "b_doubling_increments": seqs.doubling_increments(),
            "concordance_gap": gap,
            "gev": fits,
        }),
    );
    Ok(())
}
