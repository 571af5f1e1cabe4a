//! Frame-level Monte-Carlo simulation of relay selection schemes and of the
//! STBC/MRC baseline.
//!
//! Everything happens in the SNR domain: a frame sent over a combination of
//! branches is decoded once at the summed instantaneous SNR, which is exactly
//! what coherent maximum-ratio combining delivers.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::channel::{af_effective_snr, sample_realization, NetworkConfig};
use crate::coding::{ErrorDetection, FrameLink, LinkCoding, RelayDecode};
use crate::error::{Error, Result};
use crate::montecarlo::{Campaign, Estimate, SimRng, StopRule, Tally};
use crate::special::db_to_linear;

/// Transmission scheme under simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Scheme {
    Hrs,
    AfRs,
    PdfRs,
    /// Orthogonal STBC with `n_t` transmit and `n_r` receive antennas.
    Mimo {
        n_t: u32,
        n_r: u32,
    },
}

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::Hrs => "HRS".into(),
            Scheme::AfRs => "AF-RS".into(),
            Scheme::PdfRs => "PDF-RS".into(),
            Scheme::Mimo { n_t, n_r } => format!("MIMO-{}x{}", n_t, n_r),
        }
    }
}

/// Relay behaviour inside [`simulate_relay_frame`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RelayMode {
    Hybrid,
    AlwaysAmplify,
    AlwaysDecode,
}

fn simulate_relay_frame<R: Rng + ?Sized>(
    mode: RelayMode,
    cfg: &NetworkConfig,
    link: &mut FrameLink,
    rng: &mut R,
) -> bool {
    let real = sample_realization(cfg, rng);
    let mut best = f64::NEG_INFINITY;
    let mut best_corrupt = false;
    for (&g1, &g2) in real.gamma1.iter().zip(&real.gamma2) {
        let (gamma, corrupt) = match mode {
            RelayMode::AlwaysAmplify => (af_effective_snr(g1, g2), false),
            RelayMode::AlwaysDecode => (g2, false),
            RelayMode::Hybrid => match link.relay_decode(g1, rng) {
                RelayDecode::Correct => (g2, false),
                // forwards wrong data without knowing it
                RelayDecode::Undetected => (g2, true),
                RelayDecode::Detected => (af_effective_snr(g1, g2), false),
            },
        };
        // strict comparison keeps the lowest index on ties
        if gamma > best {
            best = gamma;
            best_corrupt = corrupt;
        }
    }
    if best_corrupt {
        return true;
    }
    link.frame_error(real.gamma0 + best, rng)
}

/// One HRS frame: relays that decode forward (DF), the others amplify (AF);
/// the destination combines the direct link with the strongest relay branch.
pub fn simulate_hrs_frame<R: Rng + ?Sized>(cfg: &NetworkConfig, link: &mut FrameLink, rng: &mut R) -> bool {
    simulate_relay_frame(RelayMode::Hybrid, cfg, link, rng)
}

/// One frame of relay selection with every relay amplifying.
pub fn simulate_afrs_frame<R: Rng + ?Sized>(cfg: &NetworkConfig, link: &mut FrameLink, rng: &mut R) -> bool {
    simulate_relay_frame(RelayMode::AlwaysAmplify, cfg, link, rng)
}

/// One frame of relay selection with every relay decoding correctly.
pub fn simulate_pdfrs_frame<R: Rng + ?Sized>(cfg: &NetworkConfig, link: &mut FrameLink, rng: &mut R) -> bool {
    simulate_relay_frame(RelayMode::AlwaysDecode, cfg, link, rng)
}

/// One STBC/MRC frame over `n_t * n_r` Rayleigh paths.
pub fn simulate_mimo_frame<R: Rng + ?Sized>(
    n_t: u32,
    n_r: u32,
    avg_snr: f64,
    link: &mut FrameLink,
    rng: &mut R,
) -> bool {
    let g = crate::channel::sample_mimo_combiner_snr(n_t, n_t * n_r, avg_snr, rng);
    link.frame_error(g, rng)
}

/// Importance-sampled STBC/MRC frame. The combiner SNR is drawn with per-path
/// mean `biased_scale` instead of `avg_snr / n_t`; returns the likelihood
/// ratio when the frame is in error and zero otherwise.
pub fn simulate_mimo_frame_weighted<R: Rng + ?Sized>(
    n_t: u32,
    n_r: u32,
    avg_snr: f64,
    biased_scale: f64,
    link: &mut FrameLink,
    rng: &mut R,
) -> f64 {
    let n = n_t * n_r;
    let scale = avg_snr / n_t as f64;
    let mut sum = 0.0;
    for _ in 0..n {
        let e: f64 = Exp1.sample(rng);
        sum += e;
    }
    let g = sum * biased_scale;
    if !link.frame_error(g, rng) {
        return 0.0;
    }
    let log_w = n as f64 * (biased_scale / scale).ln() - g * (1.0 / scale - 1.0 / biased_scale);
    log_w.exp()
}

/// Exponential-tilt importance sampling for the MIMO baseline: paths are
/// drawn so the combiner SNR has mean at most `target_mean_snr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSampling {
    pub target_mean_snr: f64,
}

/// A simulation campaign over an average-SNR grid.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub scheme: Scheme,
    /// Network gains; its average SNR is replaced at every grid point.
    pub network: NetworkConfig,
    pub frame_len: usize,
    pub coding: LinkCoding,
    pub detection: ErrorDetection,
    pub snr_grid_db: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    /// Skip the rest of the sweep once a point falls below this FER.
    pub fer_floor: Option<f64>,
    /// MIMO only.
    pub importance: Option<ImportanceSampling>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.stop.min_errors == 0 || self.stop.max_frames == 0 {
            return Err(Error::InvalidConfig("stop rule must be positive".into()));
        }
        if self.frame_len == 0 {
            return Err(Error::InvalidConfig("frame length must be positive".into()));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("SNR grid must be non-empty and finite".into()));
        }
        if let LinkCoding::Coded(code) = &self.coding {
            if !self.frame_len.is_multiple_of(code.k_in()) {
                return Err(Error::InvalidConfig(format!(
                    "frame length {} is not a multiple of {} input bits",
                    self.frame_len,
                    code.k_in()
                )));
            }
        }
        if let Scheme::Mimo { n_t, n_r } = self.scheme {
            if n_t == 0 || n_r == 0 {
                return Err(Error::InvalidConfig("antenna counts must be positive".into()));
            }
        }
        if let Some(is) = self.importance {
            if !(is.target_mean_snr > 0.0) {
                return Err(Error::InvalidConfig("importance target must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Simulated FER at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPoint {
    pub snr_db: f64,
    pub estimate: Estimate,
}

/// Output of [`run_campaign`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub scheme: String,
    pub points: Vec<SimPoint>,
}

impl SimResult {
    pub fn snr_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.snr_db).collect()
    }

    pub fn fer(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.estimate.fer).collect()
    }

    pub fn any_exhausted(&self) -> bool {
        self.points.iter().any(|p| p.estimate.exhausted)
    }

    /// Write `snr_db,scheme,frames,errors,fer,ci_low,ci_high`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["snr_db", "scheme", "frames", "errors", "fer", "ci_low", "ci_high"])?;
        for p in &self.points {
            let e = &p.estimate;
            w.write_record([
                p.snr_db.to_string(),
                self.scheme.clone(),
                e.frames.to_string(),
                e.errors.to_string(),
                format!("{:e}", e.fer),
                format!("{:e}", e.ci_low),
                format!("{:e}", e.ci_high),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn tally_frames(frames: u64, mut frame: impl FnMut() -> f64) -> Tally {
    let mut t = Tally::default();
    for _ in 0..frames {
        t.record(frame());
    }
    t
}

fn as_weight(error: bool) -> f64 {
    if error {
        1.0
    } else {
        0.0
    }
}

fn run_point(scenario: &Scenario, campaign: &Campaign, point: u32, snr_db: f64) -> Result<Estimate> {
    let avg_snr = db_to_linear(snr_db);
    let link = FrameLink::new(scenario.coding.clone(), scenario.frame_len).with_detection(scenario.detection);
    let stop = scenario.stop;
    let est = match scenario.scheme {
        Scheme::Mimo { n_t, n_r } => {
            let scale = avg_snr / n_t as f64;
            let biased = scenario
                .importance
                .map(|is| is.target_mean_snr / (n_t * n_r) as f64)
                .filter(|&b| b < scale);
            match biased {
                Some(b) => campaign.run_point(point, stop, true, |rng: &mut SimRng, frames| {
                    let mut link = link.clone();
                    tally_frames(frames, || {
                        simulate_mimo_frame_weighted(n_t, n_r, avg_snr, b, &mut link, rng)
                    })
                }),
                None => campaign.run_point(point, stop, false, |rng: &mut SimRng, frames| {
                    let mut link = link.clone();
                    tally_frames(frames, || {
                        as_weight(simulate_mimo_frame(n_t, n_r, avg_snr, &mut link, rng))
                    })
                }),
            }
        }
        relay => {
            let cfg = scenario.network.with_avg_snr(avg_snr)?;
            let mode = match relay {
                Scheme::Hrs => RelayMode::Hybrid,
                Scheme::AfRs => RelayMode::AlwaysAmplify,
                _ => RelayMode::AlwaysDecode,
            };
            campaign.run_point(point, stop, false, |rng: &mut SimRng, frames| {
                let mut link = link.clone();
                tally_frames(frames, || as_weight(simulate_relay_frame(mode, &cfg, &mut link, rng)))
            })
        }
    };
    Ok(est)
}

/// Simulate every grid point of `scenario`.
///
/// Point `k` of the grid uses stream family `k`, so totals depend only on the
/// seed and the campaign block size, never on the number of threads.
pub fn run_campaign(scenario: &Scenario, campaign: &Campaign) -> Result<SimResult> {
    scenario.validate()?;
    let campaign = campaign.with_seed(scenario.seed);
    let mut points = Vec::with_capacity(scenario.snr_grid_db.len());
    for (k, &db) in scenario.snr_grid_db.iter().enumerate() {
        let estimate = run_point(scenario, &campaign, k as u32, db)?;
        log::info!(
            "{} {db:.2} dB: {} errors / {} frames, FER {:.3e}",
            scenario.name,
            estimate.errors,
            estimate.frames,
            estimate.fer
        );
        let below_floor = scenario.fer_floor.is_some_and(|f| estimate.fer < f);
        points.push(SimPoint { snr_db: db, estimate });
        if below_floor {
            break;
        }
    }
    Ok(SimResult {
        scheme: scenario.scheme.label(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::ConvCode;
    use crate::montecarlo::block_stream;

    fn net(n: usize, snr_db: f64) -> NetworkConfig {
        NetworkConfig::symmetric(n, 1.0, 1.0, 1.0, db_to_linear(snr_db)).unwrap()
    }

    #[test]
    fn noiseless_limit_has_no_errors() {
        let cfg = net(2, 60.0);
        let mut link = FrameLink::new(LinkCoding::Uncoded, 100);
        let mut rng = block_stream(5, 0, 0);
        let errors = (0..10_000)
            .filter(|_| simulate_hrs_frame(&cfg, &mut link, &mut rng))
            .count();
        assert_eq!(errors, 0);
    }

    #[test]
    fn coded_frames_are_deterministic() {
        let cfg = net(2, 5.0);
        let run = || {
            let mut link = FrameLink::new(LinkCoding::Coded(ConvCode::rate_half_5_7()), 100);
            let mut rng = block_stream(9, 1, 2);
            (0..200)
                .map(|_| simulate_hrs_frame(&cfg, &mut link, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn schemes_share_fading_and_order() {
        // same stream: AF-RS and PDF-RS bracket HRS frame by frame for
        // uncoded relays only in distribution, so compare counts
        let cfg = net(2, 10.0);
        let count = |f: fn(&NetworkConfig, &mut FrameLink, &mut SimRng) -> bool| {
            let mut link = FrameLink::new(LinkCoding::Uncoded, 100);
            let mut rng = block_stream(3, 0, 0);
            (0..200_000).filter(|_| f(&cfg, &mut link, &mut rng)).count()
        };
        let (pdf, hrs, af) = (
            count(simulate_pdfrs_frame),
            count(simulate_hrs_frame),
            count(simulate_afrs_frame),
        );
        assert!(pdf < hrs && hrs < af, "{pdf} {hrs} {af}");
    }

    #[test]
    fn weighted_mimo_is_unbiased_without_tilt() {
        let mut link = FrameLink::new(LinkCoding::Uncoded, 100);
        let mut rng = block_stream(1, 0, 0);
        let scale = 10.0;
        for _ in 0..100 {
            let w = simulate_mimo_frame_weighted(1, 2, scale, scale, &mut link, &mut rng);
            assert!(w == 0.0 || (w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_scenario_rejected() {
        let s = Scenario {
            name: "x".into(),
            scheme: Scheme::Hrs,
            network: net(1, 0.0),
            frame_len: 101,
            coding: LinkCoding::Coded(ConvCode::rate_two_thirds()),
            detection: ErrorDetection::Genie,
            snr_grid_db: vec![0.0],
            stop: StopRule::default(),
            seed: 1,
            fer_floor: None,
            importance: None,
        };
        assert!(s.validate().is_err());
        let s = Scenario {
            frame_len: 100,
            stop: StopRule {
                min_errors: 0,
                max_frames: 10,
            },
            ..s
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn csv_layout() {
        let s = Scenario {
            name: "t".into(),
            scheme: Scheme::PdfRs,
            network: net(1, 0.0),
            frame_len: 100,
            coding: LinkCoding::Uncoded,
            detection: ErrorDetection::Genie,
            snr_grid_db: vec![0.0, 5.0],
            stop: StopRule {
                min_errors: 10,
                max_frames: 1000,
            },
            seed: 2,
            fer_floor: None,
            importance: None,
        };
        let res = run_campaign(&s, &Campaign::new(2, 100, 1)).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("snr_db,scheme,frames,errors,fer,ci_low,ci_high"));
        assert_eq!(lines.count(), 2);
    }
}
