//! SNR thresholds for the outage-style FER approximation.
//!
//! A block-fading FER is approximated by `F(gamma_t)`, the CDF of the
//! post-combining SNR at a threshold. For a system of diversity order `d` the
//! threshold that makes the approximation exact at high SNR is
//! `gamma_t = (d * int_0^inf g^(d-1) P(g) dg)^(1/d)`, where `P` is the
//! instantaneous AWGN FER.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::coding::FerCurve;
use crate::error::{Error, Result};
use crate::quadrature::{decay_point, integrate, Tolerance};
use crate::special::{linear_to_db, uncoded_awgn_fer};

pub use crate::special::q_function;

/// Relative tolerance for the threshold integrals.
const INTEGRAL_REL_TOL: f64 = 1e-10;
/// Integrands below this are treated as fully decayed.
const DECAY_FLOOR: f64 = 1e-16;

/// Where a threshold came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    CurveCalibrated,
    Legacy,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::CurveCalibrated => "curve-calibrated",
            Provenance::Legacy => "legacy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEntry {
    pub d: u32,
    pub gamma_t: f64,
    pub provenance: Provenance,
    pub source: Option<String>,
}

/// Thresholds for one modem/codec, keyed by diversity order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThresholdSet {
    pub entries: Vec<ThresholdEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ThresholdRow {
    d: u32,
    gamma_t_linear: f64,
    gamma_t_db: f64,
    provenance: Provenance,
}

impl ThresholdSet {
    /// Closed-form thresholds of uncoded BPSK-like modulation for `d = 1..=d_max`.
    pub fn uncoded(d_max: u32, frame_len: usize, mod_const: f64) -> Result<Self> {
        let entries = (1..=d_max)
            .map(|d| {
                Ok(ThresholdEntry {
                    d,
                    gamma_t: snr_threshold_uncoded(d, frame_len, mod_const)?,
                    provenance: Provenance::ClosedForm,
                    source: None,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }

    /// Thresholds for `d = 1..=d_max` from a measured curve.
    pub fn from_curve(d_max: u32, curve: &FerCurve) -> Result<Self> {
        let entries = (1..=d_max)
            .map(|d| {
                Ok(ThresholdEntry {
                    d,
                    gamma_t: snr_threshold_from_measured(d, curve)?,
                    provenance: Provenance::CurveCalibrated,
                    source: Some(format!("{} L={}", curve.meta.code_id, curve.meta.frame_len)),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }

    pub fn get(&self, d: u32) -> Option<f64> {
        self.entries.iter().find(|e| e.d == d).map(|e| e.gamma_t)
    }

    pub fn push(&mut self, entry: ThresholdEntry) {
        self.entries.push(entry);
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for e in &self.entries {
            w.serialize(ThresholdRow {
                d: e.d,
                gamma_t_linear: e.gamma_t,
                gamma_t_db: linear_to_db(e.gamma_t),
                provenance: e.provenance,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut entries = Vec::new();
        for row in r.deserialize() {
            let row: ThresholdRow = row?;
            if !(row.gamma_t_linear.is_finite() && row.gamma_t_linear > 0.0) {
                return Err(Error::InvalidCurve(format!(
                    "threshold for d={} must be positive",
                    row.d
                )));
            }
            entries.push(ThresholdEntry {
                d: row.d,
                gamma_t: row.gamma_t_linear,
                provenance: row.provenance,
                source: None,
            });
        }
        Ok(Self { entries })
    }
}

fn validate_order(d: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParams("diversity order must be at least 1".into()));
    }
    Ok(())
}

/// Threshold of uncoded modulation with frame length `frame_len` and
/// modulation constant `mod_const` (2 for BPSK).
pub fn snr_threshold_uncoded(d: u32, frame_len: usize, mod_const: f64) -> Result<f64> {
    validate_order(d)?;
    if frame_len == 0 || !(mod_const > 0.0) {
        return Err(Error::InvalidParams(
            "frame length and modulation constant must be positive".into(),
        ));
    }
    let order = d as f64;
    let integrand = |g: f64| order * g.powi(d as i32 - 1) * uncoded_awgn_fer(g, frame_len, mod_const);
    let upper = decay_point(integrand, 1.0, DECAY_FLOOR, 1e9)
        .ok_or_else(|| Error::Divergent("FER integrand does not decay".into()))?;
    let q = integrate(integrand, 0.0, upper, Tolerance::relative(INTEGRAL_REL_TOL))?;
    Ok(q.value.powf(1.0 / order))
}

/// Threshold from a measured or synthesized curve on a uniform linear grid.
///
/// Each grid value `g_i` stands for the cell `(g_i - step, g_i]`; below the
/// first cell the FER is taken as 1 and above the grid as 0.
pub fn snr_threshold_from_curve(d: u32, curve: &FerCurve) -> Result<f64> {
    validate_order(d)?;
    let step = curve.uniform_spacing()?;
    for issue in curve.coverage_issues() {
        log::warn!("threshold from curve '{}': {issue}", curve.meta.code_id);
    }
    let order = d as f64;
    let below = (curve.snr[0] - step).max(0.0).powf(order);
    let sum: f64 = curve
        .snr
        .iter()
        .zip(&curve.fer)
        .map(|(&g, &p)| order * g.powi(d as i32 - 1) * p * step)
        .sum();
    let total = below + sum;
    if !(total > 0.0) {
        return Err(Error::InvalidCurve("curve has no frame errors".into()));
    }
    Ok(total.powf(1.0 / order))
}

/// Cells used when a measured curve is moved onto a uniform linear grid.
pub const RESAMPLE_POINTS: usize = 20_000;

/// Threshold from a measured curve on any increasing grid (typically uniform
/// in dB): the curve is made non-increasing, interpolated onto a fine uniform
/// linear grid and passed to [`snr_threshold_from_curve`].
pub fn snr_threshold_from_measured(d: u32, curve: &FerCurve) -> Result<f64> {
    if curve.uniform_spacing().is_ok() {
        return snr_threshold_from_curve(d, curve);
    }
    snr_threshold_from_curve(d, &curve.regularized().resample_uniform(RESAMPLE_POINTS)?)
}

/// Threshold minimizing the absolute error sum:
/// `(int_0^inf (1 - P(g)) / g^2 dg)^-1`.
///
/// Integrated in `u = 1/g`, where the integrand becomes `1 - P(1/u)`; the
/// integral only exists when `P(g) -> 1` as `g -> 0`.
pub fn snr_threshold_legacy<F: Fn(f64) -> f64>(fer_fn: F) -> Result<f64> {
    let integrand = |u: f64| {
        if u == 0.0 {
            1.0 - fer_fn(f64::INFINITY)
        } else {
            1.0 - fer_fn(1.0 / u)
        }
    };
    let upper = decay_point(integrand, 1.0, DECAY_FLOOR, 1e12).ok_or_else(|| {
        Error::Divergent(format!(
            "1 - P(g) does not vanish as g -> 0 (1 - P(1e-12) = {:e})",
            integrand(1e12)
        ))
    })?;
    let q = integrate(
        integrand,
        0.0,
        upper,
        Tolerance::relative(INTEGRAL_REL_TOL).with_abs(1e-14),
    )?;
    if !(q.value > 0.0) {
        return Err(Error::Divergent("FER is one everywhere".into()));
    }
    Ok(1.0 / q.value)
}

/// Outage-style FER approximation: the SNR CDF evaluated at the threshold.
pub fn fer_outage_approx<F: Fn(f64) -> f64>(cdf_at: F, gamma_t: f64) -> f64 {
    cdf_at(gamma_t)
}

/// CDF of a Rayleigh-faded SNR with mean `avg_snr`.
pub fn rayleigh_cdf(gamma: f64, avg_snr: f64) -> f64 {
    crate::special::one_minus_exp_neg(gamma / avg_snr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::CurveMeta;
    use crate::quadrature::integrate_simpson;
    use crate::special::{db_to_linear, linear_to_db};

    #[test]
    fn bpsk_single_bit_threshold_is_quarter() {
        let g = snr_threshold_uncoded(1, 1, 2.0).unwrap();
        assert!((g - 0.25).abs() / 0.25 < 1e-6, "{g}");
    }

    #[test]
    fn uncoded_frame_thresholds() {
        // d = 2 and 5 for L = 100
        for (d, db) in [(2, 5.36), (5, 6.16)] {
            let g = snr_threshold_uncoded(d, 100, 2.0).unwrap();
            assert!((linear_to_db(g) - db).abs() <= 0.05, "d={d}: {}", linear_to_db(g));
        }
    }

    #[test]
    fn uncoded_thresholds_non_decreasing_in_order() {
        let set = ThresholdSet::uncoded(6, 100, 2.0).unwrap();
        for w in set.entries.windows(2) {
            assert!(w[1].gamma_t >= w[0].gamma_t);
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(snr_threshold_uncoded(0, 100, 2.0).is_err());
        assert!(snr_threshold_uncoded(1, 0, 2.0).is_err());
        assert!(snr_threshold_uncoded(1, 10, 0.0).is_err());
    }

    #[test]
    fn legacy_threshold_of_frame() {
        let g = snr_threshold_legacy(|g| uncoded_awgn_fer(g, 100, 2.0)).unwrap();
        assert!((linear_to_db(g) - 4.6).abs() <= 0.1, "{}", linear_to_db(g));
    }

    #[test]
    fn legacy_threshold_of_step_is_step_location() {
        let g0 = 2.5;
        let g = snr_threshold_legacy(|g| if g < g0 { 1.0 } else { 0.0 }).unwrap();
        assert!((g - g0).abs() / g0 < 1e-8, "{g}");
    }

    #[test]
    fn legacy_single_bit_diverges() {
        // P(0) = 1/2, so (1 - P(g)) / g^2 is not integrable at the origin
        assert!(matches!(
            snr_threshold_legacy(|g| uncoded_awgn_fer(g, 1, 2.0)),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn legacy_agrees_with_simpson() {
        let fer = |g: f64| uncoded_awgn_fer(g, 100, 2.0);
        let gk = snr_threshold_legacy(fer).unwrap();
        let simpson = integrate_simpson(
            |u: f64| if u == 0.0 { 1.0 } else { 1.0 - fer(1.0 / u) },
            0.0,
            2.0,
            1e-12,
            40,
        )
        .unwrap();
        assert!((gk - 1.0 / simpson).abs() / gk < 1e-6);
    }

    #[test]
    fn discrete_matches_closed_form() {
        let step = 1e-3;
        let grid: Vec<f64> = (1..=40_000).map(|k| k as f64 * step).collect();
        let curve = FerCurve::from_fn(grid, |g| uncoded_awgn_fer(g, 100, 2.0), CurveMeta::default()).unwrap();
        let discrete = snr_threshold_from_curve(2, &curve).unwrap();
        let exact = snr_threshold_uncoded(2, 100, 2.0).unwrap();
        assert!((linear_to_db(discrete) - linear_to_db(exact)).abs() < 0.02);
    }

    #[test]
    fn measured_curve_cut_at_low_fer_keeps_thresholds() {
        // dB grid as in calibration, zero beyond the first point under 1e-4
        let grid: Vec<f64> = (0..=80).map(|k| db_to_linear(-6.0 + 0.25 * k as f64)).collect();
        let mut below = false;
        let fer = grid
            .iter()
            .map(|&g| {
                let p = if below { 0.0 } else { uncoded_awgn_fer(g, 100, 2.0) };
                below |= p < 1e-4;
                p
            })
            .collect();
        let curve = FerCurve::new(grid, fer, CurveMeta::default()).unwrap();
        for d in 1..=5 {
            let got = linear_to_db(snr_threshold_from_measured(d, &curve).unwrap());
            let want = linear_to_db(snr_threshold_uncoded(d, 100, 2.0).unwrap());
            assert!((got - want).abs() < 0.02, "d={d}: {got} vs {want}");
        }
    }

    #[test]
    fn discrete_rejects_non_uniform() {
        let grid: Vec<f64> = (0..20).map(|k| db_to_linear(k as f64 * 0.5)).collect();
        let curve = FerCurve::from_fn(grid, |g| uncoded_awgn_fer(g, 100, 2.0), CurveMeta::default()).unwrap();
        assert!(matches!(
            snr_threshold_from_curve(2, &curve),
            Err(Error::NonUniformGrid(_))
        ));
    }

    #[test]
    fn outage_approx_rayleigh() {
        assert_eq!(fer_outage_approx(|g| rayleigh_cdf(g, 100.0), 0.0), 0.0);
        let v = fer_outage_approx(|g| rayleigh_cdf(g, 100.0), 0.25);
        assert!((v - 0.002_496_877_6).abs() < 1e-9);
    }

    #[test]
    fn threshold_csv_round_trip() {
        let set = ThresholdSet::uncoded(3, 100, 2.0).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("d,gamma_t_linear,gamma_t_db,provenance\n1,"));
        assert!(text.contains(",closed-form\n"));
        let back = ThresholdSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.entries.len(), 3);
        assert_eq!(back.get(2), set.get(2));
    }
}
