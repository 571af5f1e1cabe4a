//! `analyze` and `simulate`: evaluate one scenario file.

use std::path::PathBuf;

use clap::Args;
use hrsfer::analysis::{
    mimo_fer_approx, mimo_fer_asymptotic, relay_fer_sweep, write_fer_points, FerPoint, RelayScheme,
};
use hrsfer::simulator::{run_campaign, Scheme};
use hrsfer::special::{db_to_linear, linear_to_db};

use super::{output, Context};
use crate::calibrate::plan_thresholds;
use crate::error::CliResult;
use crate::scenario::Plan;

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn relay_scheme(scheme: Scheme) -> Option<RelayScheme> {
    match scheme {
        Scheme::Hrs => Some(RelayScheme::Hrs),
        Scheme::AfRs => Some(RelayScheme::AfRs),
        Scheme::PdfRs => Some(RelayScheme::PdfRs),
        Scheme::Mimo { .. } => None,
    }
}

/// Analytical and high-SNR FER of a plan over its grid.
pub fn analytical_points(plan: &Plan, gamma_t1: f64, gamma_td: f64) -> CliResult<Vec<FerPoint>> {
    match (plan.scheme, relay_scheme(plan.scheme)) {
        (_, Some(scheme)) => Ok(relay_fer_sweep(scheme, &plan.network, gamma_t1, gamma_td, &plan.grid)?),
        (Scheme::Mimo { n_t, n_r }, None) => Ok(plan
            .grid
            .iter()
            .map(|&db| FerPoint {
                snr_db: db,
                fer_analytical: mimo_fer_approx(n_t, n_t * n_r, db_to_linear(db), gamma_td),
                fer_asymptotic: mimo_fer_asymptotic(n_t, n_t * n_r, db_to_linear(db), gamma_td),
                scheme: plan.scheme.label(),
            })
            .collect()),
        _ => unreachable!("every relay scheme maps to a RelayScheme"),
    }
}

fn log_thresholds(plan: &Plan, gamma_t1: f64, gamma_td: f64) {
    let (d1, dd) = plan.diversity_orders();
    eprintln!(
        "{}: {}; gamma_t(d={d1}) = {:.3} dB, gamma_t(d={dd}) = {:.3} dB",
        plan.name,
        plan.link.describe(),
        linear_to_db(gamma_t1),
        linear_to_db(gamma_td)
    );
}

pub fn analyze(args: &ScenarioArgs, ctx: &Context) -> CliResult<()> {
    let plan = Plan::load(&args.scenario)?;
    let campaign = ctx.campaign(plan.seed, plan.threads);
    let (t1, td) = plan_thresholds(&plan, &campaign)?;
    log_thresholds(&plan, t1, td);
    let points = analytical_points(&plan, t1, td)?;
    write_fer_points(&points, output(args.out.as_deref())?)?;
    Ok(())
}

pub fn simulate(args: &ScenarioArgs, ctx: &Context) -> CliResult<()> {
    let plan = Plan::load(&args.scenario)?;
    let campaign = ctx.campaign(plan.seed, plan.threads);
    let target = if plan.importance {
        let (t1, td) = plan_thresholds(&plan, &campaign)?;
        log_thresholds(&plan, t1, td);
        Some(td)
    } else {
        None
    };
    let result = run_campaign(&plan.scenario(target), &campaign)?;
    for p in &result.points {
        let e = &p.estimate;
        eprintln!(
            "{:>6.2} dB  {:>8} errors / {:>10} frames  FER {:.3e} [{:.3e}, {:.3e}]{}",
            p.snr_db,
            e.errors,
            e.frames,
            e.fer,
            e.ci_low,
            e.ci_high,
            if e.exhausted { "  (budget exhausted)" } else { "" }
        );
    }
    if result.any_exhausted() {
        log::warn!("some points stopped on max_frames before reaching min_errors");
    }
    if result.points.len() < plan.grid.len() {
        eprintln!(
            "sweep ended below fer_floor after {} of {} points",
            result.points.len(),
            plan.grid.len()
        );
    }
    result.write_csv(output(args.out.as_deref())?)?;
    Ok(())
}
