//! Scenario files: TOML, optionally starting from a preset case.

use std::path::{Path, PathBuf};

use hrsfer::cases::{default_calibration_grid, table_case, CaseSpec};
use hrsfer::channel::NetworkConfig;
use hrsfer::coding::{CalibrationBudget, ConvCode, DbGrid, ErrorDetection, LinkCoding};
use hrsfer::montecarlo::StopRule;
use hrsfer::simulator::{ImportanceSampling, Scenario, Scheme};
use serde::Deserialize;

use crate::error::{invalid, CliResult};

pub const DEFAULT_SEED: u64 = 1;

pub fn default_grid() -> DbGrid {
    DbGrid {
        start: 0.0,
        stop: 40.0,
        step: 2.5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKey {
    Hrs,
    AfRs,
    PdfRs,
    Mimo,
}

/// How `frame_len` is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FrameUnit {
    /// Channel symbols per frame, termination tail included.
    #[default]
    Symbols,
    /// Information bits per frame.
    InfoBits,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeKey {
    /// Optional check, e.g. "1/2"; must match the generator matrix.
    pub rate: Option<String>,
    /// Octal generators, rows separated by ';', e.g. "5,7" or "23,35,0;0,5,13".
    pub generators_octal: String,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridKey {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopKey {
    pub min_errors: u64,
    pub max_frames: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdKey {
    pub gamma_t1_db: Option<f64>,
    pub gamma_td_db: Option<f64>,
    /// CSV written by `hrsfer threshold --out`, relative to the scenario file.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationKey {
    pub min_errors: Option<u64>,
    pub max_frames: Option<u64>,
    pub stop_below_fer: Option<f64>,
    pub grid: Option<GridKey>,
}

/// Raw contents of a scenario file. Every key is optional; missing values
/// come from `case` when given, otherwise from the documented defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub case: Option<u8>,
    pub scheme: Option<SchemeKey>,
    /// Relays, or receive antennas for `mimo`.
    pub n: Option<usize>,
    /// Transmit antennas for `mimo`.
    pub n_t: Option<u32>,
    pub omega0: Option<f64>,
    pub omega1: Option<Vec<f64>>,
    pub omega2: Option<Vec<f64>>,
    pub frame_len: Option<usize>,
    pub frame_unit: Option<FrameUnit>,
    pub code: Option<CodeKey>,
    pub detection: Option<ErrorDetection>,
    pub snr_grid_db: Option<GridKey>,
    pub stop_rule: Option<StopKey>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub fer_floor: Option<f64>,
    pub importance_sampling: Option<bool>,
    pub thresholds: Option<ThresholdKey>,
    pub calibration: Option<CalibrationKey>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }
}

/// Frame geometry of one hop.
#[derive(Debug, Clone)]
pub struct LinkSpec {
    pub code: Option<ConvCode>,
    pub symbols: usize,
    pub info_len: usize,
}

impl LinkSpec {
    pub fn new(code: Option<ConvCode>, frame_len: usize, unit: FrameUnit) -> CliResult<Self> {
        if frame_len == 0 {
            return Err(invalid("frame_len must be positive"));
        }
        let (symbols, info_len) = match (&code, unit) {
            (None, _) => (frame_len, frame_len),
            (Some(c), FrameUnit::Symbols) => (frame_len, c.info_len_for_symbols(frame_len)?),
            (Some(c), FrameUnit::InfoBits) => {
                if !frame_len.is_multiple_of(c.k_in()) {
                    return Err(invalid(format!(
                        "frame_len {frame_len} is not a multiple of the {} input bits of code {}",
                        c.k_in(),
                        c.octal_id()
                    )));
                }
                (c.coded_len(frame_len), frame_len)
            }
        };
        Ok(Self {
            code,
            symbols,
            info_len,
        })
    }

    pub fn coding(&self) -> LinkCoding {
        match &self.code {
            Some(c) => LinkCoding::Coded(c.clone()),
            None => LinkCoding::Uncoded,
        }
    }

    pub fn describe(&self) -> String {
        match &self.code {
            Some(c) => format!(
                "code {} with {} info bits in {} symbols",
                c.octal_id(),
                self.info_len,
                self.symbols
            ),
            None => format!("uncoded BPSK, {} symbols", self.symbols),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ThresholdSource {
    Compute,
    Fixed { gamma_t1: f64, gamma_td: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    pub budget: CalibrationBudget,
    pub grid: DbGrid,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            budget: CalibrationBudget::default(),
            grid: default_calibration_grid(),
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Plan {
    pub name: String,
    pub scheme: Scheme,
    pub n: usize,
    pub network: NetworkConfig,
    pub link: LinkSpec,
    pub detection: ErrorDetection,
    pub grid: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
    pub threads: Option<usize>,
    pub fer_floor: Option<f64>,
    pub importance: bool,
    pub thresholds: ThresholdSource,
    pub calibration: Calibration,
}

fn broadcast(key: &str, values: Option<Vec<f64>>, preset: f64, n: usize) -> CliResult<Vec<f64>> {
    match values {
        None => Ok(vec![preset; n]),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; n]),
        Some(v) if v.len() == n => Ok(v),
        Some(v) => Err(invalid(format!(
            "key `{key}` has {} entries, expected 1 or n = {n}",
            v.len()
        ))),
    }
}

pub fn grid_points(g: GridKey) -> CliResult<Vec<f64>> {
    if !(g.start.is_finite() && g.stop.is_finite() && g.step > 0.0) || g.stop < g.start {
        return Err(invalid(format!(
            "SNR grid needs start <= stop and step > 0 (got {}:{}:{})",
            g.start, g.stop, g.step
        )));
    }
    Ok(DbGrid {
        start: g.start,
        stop: g.stop,
        step: g.step,
    }
    .points())
}

fn parse_code(key: &CodeKey) -> CliResult<ConvCode> {
    let code = ConvCode::from_octal(&key.generators_octal)?;
    if let Some(rate) = &key.rate {
        let want = format!("{}/{}", code.k_in(), code.n_out());
        if rate.replace(' ', "") != want {
            return Err(invalid(format!(
                "code.rate = \"{rate}\" does not match generators {} (rate {want})",
                key.generators_octal
            )));
        }
    }
    Ok(code)
}

impl Plan {
    /// Resolve a scenario file; relative paths are taken from `base_dir`.
    pub fn resolve(file: ScenarioFile, base_dir: &Path) -> CliResult<Self> {
        let preset: Option<CaseSpec> = file.case.map(table_case).transpose()?;
        let scheme_key = match (&preset, file.scheme) {
            (Some(c), Some(SchemeKey::Mimo)) if !c.is_mimo() => {
                return Err(invalid(format!(
                    "case {} is a relay case; `scheme = \"mimo\"` needs case 0",
                    c.id
                )))
            }
            (Some(c), Some(s)) if c.is_mimo() && s != SchemeKey::Mimo => {
                return Err(invalid("case 0 is the MIMO reference; `scheme` must be \"mimo\""))
            }
            (Some(c), None) if c.is_mimo() => SchemeKey::Mimo,
            (_, s) => s.unwrap_or(SchemeKey::Hrs),
        };
        let n = match (file.n, &file.omega1) {
            (Some(n), _) => n,
            (None, Some(w)) if w.len() > 1 => w.len(),
            _ => {
                return Err(invalid(
                    "missing key `n` (number of relays, or receive antennas for mimo)",
                ))
            }
        };
        if n == 0 {
            return Err(invalid("`n` must be at least 1"));
        }
        let scheme = match scheme_key {
            SchemeKey::Hrs => Scheme::Hrs,
            SchemeKey::AfRs => Scheme::AfRs,
            SchemeKey::PdfRs => Scheme::PdfRs,
            SchemeKey::Mimo => Scheme::Mimo {
                n_t: file.n_t.unwrap_or(1),
                n_r: n as u32,
            },
        };
        if file.n_t.is_some() && scheme_key != SchemeKey::Mimo {
            return Err(invalid("key `n_t` only applies to scheme \"mimo\""));
        }

        let (p0, p1, p2) = preset
            .as_ref()
            .map_or((1.0, 1.0, 1.0), |c| (c.omega0, c.omega1, c.omega2));
        let network = NetworkConfig::new(
            file.omega0.unwrap_or(p0),
            broadcast("omega1", file.omega1, p1, n)?,
            broadcast("omega2", file.omega2, p2, n)?,
            1.0,
        )?;

        let code = match (&file.code, &preset) {
            (Some(k), _) => Some(parse_code(k)?),
            (None, Some(c)) => c.code.clone(),
            (None, None) => None,
        };
        let frame_len = match (file.frame_len, &preset) {
            (Some(l), _) => l,
            (None, Some(c)) => c.frame_symbols,
            (None, None) => 100,
        };
        let link = LinkSpec::new(code, frame_len, file.frame_unit.unwrap_or_default())?;

        let grid = grid_points(file.snr_grid_db.unwrap_or(GridKey {
            start: default_grid().start,
            stop: default_grid().stop,
            step: default_grid().step,
        }))?;
        let stop = file.stop_rule.map_or(StopRule::default(), |s| StopRule {
            min_errors: s.min_errors,
            max_frames: s.max_frames,
        });
        if stop.min_errors == 0 || stop.max_frames == 0 {
            return Err(invalid(
                "stop_rule.min_errors and stop_rule.max_frames must be positive",
            ));
        }
        if let Some(f) = file.fer_floor {
            if !(f > 0.0 && f < 1.0) {
                return Err(invalid("fer_floor must lie in (0, 1)"));
            }
        }
        if file.importance_sampling == Some(true) && scheme_key != SchemeKey::Mimo {
            return Err(invalid("importance_sampling is only implemented for scheme \"mimo\""));
        }
        if file.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }

        let thresholds = match file.thresholds {
            None => ThresholdSource::Compute,
            Some(ThresholdKey {
                gamma_t1_db: None,
                gamma_td_db: None,
                file: Some(p),
            }) => ThresholdSource::File(base_dir.join(p)),
            Some(ThresholdKey {
                gamma_t1_db: Some(t1),
                gamma_td_db: Some(td),
                file: None,
            }) => {
                let (gamma_t1, gamma_td) = (hrsfer::special::db_to_linear(t1), hrsfer::special::db_to_linear(td));
                if gamma_t1 > gamma_td {
                    return Err(invalid("thresholds.gamma_t1_db must not exceed thresholds.gamma_td_db"));
                }
                ThresholdSource::Fixed { gamma_t1, gamma_td }
            }
            Some(_) => {
                return Err(invalid(
                    "`thresholds` takes either `file` or both `gamma_t1_db` and `gamma_td_db`",
                ))
            }
        };

        let mut calibration = Calibration::default();
        if let Some(c) = file.calibration {
            if let Some(v) = c.min_errors {
                calibration.budget.min_errors = v;
            }
            if let Some(v) = c.max_frames {
                calibration.budget.max_frames = v;
            }
            if c.stop_below_fer.is_some() {
                calibration.budget.stop_below_fer = c.stop_below_fer;
            }
            if let Some(g) = c.grid {
                grid_points(g)?;
                calibration.grid = DbGrid {
                    start: g.start,
                    stop: g.stop,
                    step: g.step,
                };
            }
        }

        let name = file.name.unwrap_or_else(|| match &preset {
            Some(c) => format!("case{}-n{}-{}", c.id, n, scheme.label()),
            None => format!("custom-n{}-{}", n, scheme.label()),
        });
        Ok(Self {
            name,
            scheme,
            n,
            network,
            link,
            detection: file.detection.unwrap_or_default(),
            grid,
            stop,
            seed: file.seed.unwrap_or(DEFAULT_SEED),
            threads: file.threads,
            fer_floor: file.fer_floor,
            importance: file.importance_sampling.unwrap_or(false),
            thresholds,
            calibration,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let file = ScenarioFile::load(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::resolve(file, base)
    }

    /// Diversity orders of the relay and destination thresholds.
    pub fn diversity_orders(&self) -> (u32, u32) {
        match self.scheme {
            Scheme::Mimo { n_t, n_r } => (n_t * n_r, n_t * n_r),
            _ => (1, self.n as u32 + 1),
        }
    }

    /// Simulator scenario; `importance_target` is the mean SNR MIMO frames are
    /// drawn around when importance sampling is on.
    pub fn scenario(&self, importance_target: Option<f64>) -> Scenario {
        Scenario {
            name: self.name.clone(),
            scheme: self.scheme,
            network: self.network.clone(),
            frame_len: self.link.info_len,
            coding: self.link.coding(),
            detection: self.detection,
            snr_grid_db: self.grid.clone(),
            stop: self.stop,
            seed: self.seed,
            fer_floor: self.fer_floor,
            importance: importance_target
                .filter(|_| self.importance)
                .map(|target_mean_snr| ImportanceSampling { target_mean_snr }),
        }
    }
}
