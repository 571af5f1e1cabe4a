use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::link::{FrameLink, LinkCoding};
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::isotonic::fit_non_increasing;
use crate::montecarlo::{Campaign, StopRule, Tally};
use crate::special::db_to_linear;

/// Instantaneous frame error rate over AWGN as a function of linear SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct FerCurve {
    pub snr: Vec<f64>,
    pub fer: Vec<f64>,
    /// Frames simulated per point; zero for synthesized or resampled points.
    pub frames: Vec<u64>,
    pub errors: Vec<u64>,
    pub meta: CurveMeta,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveMeta {
    pub code_id: String,
    pub frame_len: usize,
    pub min_errors: u64,
    pub max_frames: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    snr_linear: f64,
    fer: f64,
    frames: u64,
    errors: u64,
}

/// Relative tolerance on grid spacing when checking uniformity.
const UNIFORM_TOL: f64 = 1e-6;

impl FerCurve {
    pub fn new(snr: Vec<f64>, fer: Vec<f64>, meta: CurveMeta) -> Result<Self> {
        let n = snr.len();
        let curve = Self {
            frames: vec![0; n],
            errors: vec![0; n],
            snr,
            fer,
            meta,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Sample an analytic FER function on `snr`.
    pub fn from_fn<F: Fn(f64) -> f64>(snr: Vec<f64>, f: F, meta: CurveMeta) -> Result<Self> {
        let fer = snr.iter().map(|&g| f(g)).collect();
        Self::new(snr, fer, meta)
    }

    fn validate(&self) -> Result<()> {
        let n = self.snr.len();
        if n == 0 {
            return Err(Error::InvalidCurve("empty curve".into()));
        }
        if self.fer.len() != n || self.frames.len() != n || self.errors.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: self.fer.len(),
            });
        }
        if self.snr.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidCurve("SNR values must be finite and non-negative".into()));
        }
        if self.snr.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCurve("SNR grid must be strictly increasing".into()));
        }
        if self.fer.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidCurve("FER values must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snr.is_empty()
    }

    /// Grid spacing when the grid is uniform in linear SNR.
    pub fn uniform_spacing(&self) -> Result<f64> {
        if self.len() < 2 {
            return Err(Error::InvalidCurve("need at least two grid points".into()));
        }
        let step = (self.snr[self.len() - 1] - self.snr[0]) / (self.len() - 1) as f64;
        let worst = self
            .snr
            .windows(2)
            .map(|w| ((w[1] - w[0]) - step).abs() / step)
            .fold(0.0, f64::max);
        if worst > UNIFORM_TOL {
            return Err(Error::NonUniformGrid(worst));
        }
        Ok(step)
    }

    /// Points that stopped on the frame cap before reaching `min_errors`.
    pub fn exhausted_points(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.frames[i] > 0 && self.errors[i] < self.meta.min_errors)
            .collect()
    }

    /// Human-readable coverage problems: the curve should start near FER 1 and
    /// end near FER 0.
    pub fn coverage_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let first = self.fer[0];
        let last = self.fer[self.len() - 1];
        if first < 0.9 {
            issues.push(format!("FER at the lowest SNR is {first:.3}, expected close to 1"));
        }
        if last > 1e-2 {
            issues.push(format!("FER at the highest SNR is {last:.3e}, expected close to 0"));
        }
        issues
    }

    /// Non-increasing least-squares fit, weighted by frames per point.
    pub fn regularized(&self) -> FerCurve {
        let weights: Vec<f64> = self
            .frames
            .iter()
            .map(|&f| if f == 0 { 1.0 } else { f as f64 })
            .collect();
        let mut out = self.clone();
        out.fer = fit_non_increasing(&self.fer, &weights);
        out
    }

    /// Resample onto the uniform linear grid `k * step`, `k = 1..=points`,
    /// spanning `(0, max snr]`. Monotone cubic interpolation inside the
    /// measured range; FER is taken as 1 below it.
    pub fn resample_uniform(&self, points: usize) -> Result<FerCurve> {
        if points < 2 {
            return Err(Error::InvalidCurve("resampling needs at least two points".into()));
        }
        let hi = self.snr[self.len() - 1];
        let step = hi / points as f64;
        let lo = self.snr[0];
        let interp = if self.len() >= 2 {
            Some(MonotoneCubic::new(&self.snr, &self.fer)?)
        } else {
            None
        };
        let grid: Vec<f64> = (1..=points).map(|k| k as f64 * step).collect();
        let fer = grid
            .iter()
            .map(|&g| {
                if g < lo {
                    1.0
                } else {
                    interp.as_ref().map_or(self.fer[0], |c| c.eval(g)).clamp(0.0, 1.0)
                }
            })
            .collect();
        FerCurve::new(grid, fer, self.meta.clone())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for i in 0..self.len() {
            w.serialize(CurveRow {
                snr_linear: self.snr[i],
                fer: self.fer[i],
                frames: self.frames[i],
                errors: self.errors[i],
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, meta: CurveMeta) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let rows: Vec<CurveRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
        let curve = Self {
            snr: rows.iter().map(|r| r.snr_linear).collect(),
            fer: rows.iter().map(|r| r.fer).collect(),
            frames: rows.iter().map(|r| r.frames).collect(),
            errors: rows.iter().map(|r| r.errors).collect(),
            meta,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path, meta: CurveMeta) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, meta)
    }
}

/// SNR sweep in dB, `start..=stop` in steps of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DbGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.step <= 0.0 || self.stop < self.start {
            return vec![self.start];
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Monte-Carlo budget for measuring an AWGN FER curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBudget {
    pub min_errors: u64,
    pub max_frames: u64,
    /// Stop the sweep after the first point whose FER falls below this value;
    /// the remainder of the curve is treated as zero.
    pub stop_below_fer: Option<f64>,
}

impl Default for CalibrationBudget {
    fn default() -> Self {
        Self {
            min_errors: 100,
            max_frames: 1_000_000,
            stop_below_fer: Some(1e-4),
        }
    }
}

/// Measure the AWGN frame error rate of `coding` on a dB grid.
pub fn measure_awgn_fer_curve(
    coding: &LinkCoding,
    frame_len: usize,
    grid: &DbGrid,
    budget: &CalibrationBudget,
    campaign: &Campaign,
) -> Result<FerCurve> {
    if let LinkCoding::Coded(code) = coding {
        if !frame_len.is_multiple_of(code.k_in()) {
            return Err(Error::LengthMismatch {
                expected: frame_len.div_ceil(code.k_in()) * code.k_in(),
                actual: frame_len,
            });
        }
    }
    let stop = StopRule {
        min_errors: budget.min_errors,
        max_frames: budget.max_frames,
    };
    let mut curve = FerCurve {
        snr: Vec::new(),
        fer: Vec::new(),
        frames: Vec::new(),
        errors: Vec::new(),
        meta: CurveMeta {
            code_id: match coding {
                LinkCoding::Coded(code) => code.octal_id(),
                _ => "uncoded".into(),
            },
            frame_len,
            min_errors: budget.min_errors,
            max_frames: budget.max_frames,
        },
    };
    for (point, db) in grid.points().into_iter().enumerate() {
        let snr = db_to_linear(db);
        let est = campaign.run_point(point as u32, stop, false, |rng, frames| {
            let mut link = FrameLink::new(coding.clone(), frame_len);
            let mut tally = Tally::default();
            for _ in 0..frames {
                tally.record(if link.frame_error(snr, rng) { 1.0 } else { 0.0 });
            }
            tally
        });
        if est.exhausted {
            log::warn!(
                "AWGN point {db:.2} dB exhausted its budget: {} errors in {} frames",
                est.errors,
                est.frames
            );
        }
        curve.snr.push(snr);
        curve.fer.push(est.fer);
        curve.frames.push(est.frames);
        curve.errors.push(est.errors);
        if budget.stop_below_fer.is_some_and(|floor| est.fer < floor) {
            break;
        }
    }
    curve.validate()?;
    Ok(curve)
}
