use openevt_core::extremes::{
    boundary_levels, conditioned_ensemble, h0_oscillation, return_ratios, theta_formula,
    theta_gumbel, theta_spectral, Estimate, ThetaEstimates,
};
use openevt_core::interval_maps::TargetClass;
use openevt_core::ulam::{hole_smallness, perturbed_eigenvalue_curve, MeasureOracle, PerturbedSpectrum};
use openevt_core::Error;

use super::{Context, Recorder};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, fmt_opt, write_csv};

/// `h0` jumps above this, relative, near `z` are flagged.
const CONTINUITY_FLAG: f64 = 0.05;

/// `theta.csv` (method, estimate, error), `returns.csv` (k, radius, r_kn,
/// q_kn) and `perturbed.csv` (radius, lambda_n, delta_n, slope).
pub fn run_theta(ctx: &Context, rec: &mut Recorder) -> CliResult<ThetaEstimates> {
    let (cfg, sys, sol, spec) = (&ctx.cfg, &ctx.sys, &ctx.sol, &ctx.spec);
    let z = cfg.z;
    if !spec.class.on_survivor() {
        return Err(Error::ClassificationMismatch {
            expected: "periodic or nonperiodic",
            found: spec.class.label(),
        }
        .into());
    }
    let beta = sys.map().beta();
    let deriv = match spec.class {
        TargetClass::Periodic { p } => {
            if !hole_smallness(sol.alpha, beta, cfg.d_const) {
                let reason = format!(
                    "alpha = {} <= d_const/beta = {} at a periodic target",
                    sol.alpha,
                    cfg.d_const / beta
                );
                rec.warn("hole_smallness", "ulam", "hole", reason.clone());
                return Err(CliError::Refused {
                    pipeline: "theta",
                    reason,
                    parameter: "hole".into(),
                });
            }
            sys.map().orbit_derivative(z, p)?
        }
        _ => 1.0,
    };
    let osc = h0_oscillation(sol, z);
    rec.result("h0_oscillation", osc);
    if osc > CONTINUITY_FLAG {
        rec.warn(
            "continuity_assumption",
            "extremes",
            format!("z={z}"),
            format!("h0 jumps by {osc} (relative) between the bins next to z"),
        );
    }
    let formula = theta_formula(spec, sol.alpha, deriv)?;
    let dir = &ctx.out_dir;

    let o = &cfg.options;
    let spectral = match converged_spectrum(ctx, rec) {
        Ok(ps) => {
            let rows: Vec<Vec<String>> = (0..ps.radii.len())
                .map(|i| {
                    vec![
                        fmt_f64(ps.radii[i]),
                        fmt_f64(ps.lambda_n[i]),
                        fmt_f64(ps.delta_n[i]),
                        fmt_f64(ps.slope_estimates[i]),
                    ]
                })
                .collect();
            rec.file(
                "theta",
                write_csv(dir, "perturbed.csv", &["radius", "lambda_n", "delta_n", "slope"], &rows)?,
            );
            optional(rec, theta_spectral(&ps))
        }
        Err(e) => optional(rec, Err(e)),
    };

    let returns = match return_ratios(sys, sol, z, o.k_max, &o.return_radii) {
        Ok(rr) => {
            let mut rows = Vec::new();
            for (j, r) in rr.radii.iter().enumerate() {
                for k in 0..=rr.k_max {
                    rows.push(vec![
                        k.to_string(),
                        fmt_f64(*r),
                        fmt_f64(rr.r_kn[j][k]),
                        fmt_f64(rr.q_kn[j][k]),
                    ]);
                }
            }
            rec.file("theta", write_csv(dir, "returns.csv", &["k", "radius", "r_kn", "q_kn"], &rows)?);
            if !rr.stable {
                rec.warn(
                    "unstable_returns",
                    "extremes",
                    "options.return_radii",
                    format!("r_k changes by {} between the two smallest radii", rr.stability),
                );
            }
            rec.result("q_r_identity_residual", rr.identity_residual(sol.alpha));
            Some(Estimate {
                value: rr.theta_ret,
                error: rr.stability,
            })
        }
        Err(e) => optional(rec, Err(e)),
    };

    let gumbel = gumbel_estimate(ctx).map_or_else(|e| optional(rec, Err(e)), |g| Some(g.theta));

    let est = ThetaEstimates {
        classification: spec.class,
        theta_formula: formula,
        theta_spectral: spectral,
        theta_return: returns,
        theta_gumbel: gumbel,
    };
    let row = |name: &str, e: Option<Estimate>| {
        vec![name.to_string(), fmt_opt(e.map(|e| e.value)), fmt_opt(e.map(|e| e.error))]
    };
    let rows = vec![
        vec!["formula".to_string(), fmt_opt(formula), fmt_f64(0.0)],
        row("spectral", spectral),
        row("return", returns),
        row("gumbel", gumbel),
    ];
    rec.file("theta", write_csv(dir, "theta.csv", &["method", "estimate", "error"], &rows)?);
    rec.result("theta", &est);
    Ok(est)
}

/// Perturbed spectrum over the radii whose eigenproblem converges. A ball
/// that splits the survivor set into pieces with nearly equal escape rates
/// can stall power iteration; such radii are dropped with a warning.
fn converged_spectrum(ctx: &Context, rec: &mut Recorder) -> Result<PerturbedSpectrum, Error> {
    let mut out = PerturbedSpectrum {
        radii: Vec::new(),
        lambda_n: Vec::new(),
        delta_n: Vec::new(),
        slope_estimates: Vec::new(),
        aligned: Vec::new(),
    };
    for &r in &ctx.cfg.options.spectral_radii {
        match perturbed_eigenvalue_curve(&ctx.sys, &ctx.sol, ctx.cfg.z, &[r], true, true) {
            Ok(ps) => {
                out.radii.extend(ps.radii);
                out.lambda_n.extend(ps.lambda_n);
                out.delta_n.extend(ps.delta_n);
                out.slope_estimates.extend(ps.slope_estimates);
                out.aligned.extend(ps.aligned);
            }
            Err(e @ Error::Convergence { .. }) => {
                rec.warn(e.name(), e.module(), format!("radius={r}"), e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn optional<T>(rec: &mut Recorder, r: Result<T, Error>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            rec.warn_error(&e.into());
            None
        }
    }
}

/// Gumbel fit over the τ grid at block length `options.gumbel_n`.
pub fn gumbel_estimate(ctx: &Context) -> Result<openevt_core::extremes::GumbelFit, Error> {
    let (cfg, sys, sol) = (&ctx.cfg, &ctx.sys, &ctx.sol);
    let n = cfg.options.gumbel_n;
    let oracle = MeasureOracle::new(sys, sol);
    let radii = cfg
        .tau
        .iter()
        .map(|t| boundary_levels(&oracle, cfg.z, *t, &[n]).map(|l| l.radii[0]))
        .collect::<Result<Vec<f64>, Error>>()?;
    let ens = conditioned_ensemble(sys, sol, cfg.z, n, cfg.n_particles, cfg.seed)?;
    theta_gumbel(&ens, &cfg.tau, &radii)
}
