use std::fs::File;

use hrsfer::cases::BPSK_MOD_CONST;
use hrsfer::coding::{measure_awgn_fer_curve, FerCurve};
use hrsfer::montecarlo::Campaign;
use hrsfer::special::linear_to_db;
use hrsfer::threshold::{snr_threshold_from_measured, snr_threshold_uncoded, ThresholdSet};

use crate::error::{invalid, CliError, CliResult};
use crate::scenario::{Calibration, LinkSpec, Plan, ThresholdSource};

/// Points at or above this FER must reach the error target; the threshold
/// integral is dominated by them.
const BUDGET_CRITICAL_FER: f64 = 1e-3;

/// Measure the AWGN FER curve of a coded link.
pub fn calibrate(link: &LinkSpec, calibration: &Calibration, campaign: &Campaign) -> CliResult<FerCurve> {
    log::info!("calibrating {} over {:?}", link.describe(), calibration.grid);
    let curve = measure_awgn_fer_curve(
        &link.coding(),
        link.info_len,
        &calibration.grid,
        &calibration.budget,
        campaign,
    )?;
    for issue in curve.coverage_issues() {
        log::warn!("calibration curve: {issue}");
    }
    let short: Vec<String> = curve
        .exhausted_points()
        .into_iter()
        .filter(|&i| curve.fer[i] >= BUDGET_CRITICAL_FER)
        .map(|i| format!("{:.2} dB ({} errors)", linear_to_db(curve.snr[i]), curve.errors[i]))
        .collect();
    if !short.is_empty() {
        return Err(CliError::Budget(format!(
            "calibration points {} stopped at {} frames before reaching {} errors",
            short.join(", "),
            calibration.budget.max_frames,
            calibration.budget.min_errors
        )));
    }
    Ok(curve)
}

/// Thresholds of orders `orders` for a link; coded links are calibrated
/// once for all orders.
pub fn link_thresholds(
    link: &LinkSpec,
    orders: &[u32],
    calibration: &Calibration,
    campaign: &Campaign,
) -> CliResult<(Vec<f64>, Option<FerCurve>)> {
    if link.code.is_none() {
        let values = orders
            .iter()
            .map(|&d| snr_threshold_uncoded(d, link.symbols, BPSK_MOD_CONST))
            .collect::<hrsfer::Result<Vec<_>>>()?;
        return Ok((values, None));
    }
    let curve = calibrate(link, calibration, campaign)?;
    let values = orders
        .iter()
        .map(|&d| snr_threshold_from_measured(d, &curve))
        .collect::<hrsfer::Result<Vec<_>>>()?;
    Ok((values, Some(curve)))
}

/// `(gamma_t1, gamma_td)` of a plan in linear scale.
pub fn plan_thresholds(plan: &Plan, campaign: &Campaign) -> CliResult<(f64, f64)> {
    let (d1, dd) = plan.diversity_orders();
    match &plan.thresholds {
        ThresholdSource::Fixed { gamma_t1, gamma_td } => Ok((*gamma_t1, *gamma_td)),
        ThresholdSource::File(path) => {
            let file = File::open(path).map_err(|e| invalid(format!("cannot open {}: {e}", path.display())))?;
            let set = ThresholdSet::read_csv(file)?;
            let get = |d: u32| {
                set.get(d)
                    .ok_or_else(|| invalid(format!("{} has no threshold for d = {d}", path.display())))
            };
            Ok((get(d1)?, get(dd)?))
        }
        ThresholdSource::Compute => {
            let (v, _) = link_thresholds(&plan.link, &[d1, dd], &plan.calibration, campaign)?;
            Ok((v[0], v[1]))
        }
    }
}
