use std::fs::File;
use std::path::PathBuf;

use clap::Args;
use hrsfer::analysis::{mimo_fer_approx, mimo_fer_asymptotic, relay_fer_sweep, RelayScheme};
use hrsfer::cases::{table_case, CaseSpec, BPSK_MOD_CONST, CASE_RELAY_COUNTS};
use hrsfer::montecarlo::StopRule;
use hrsfer::simulator::{run_campaign, ImportanceSampling, Scheme, SimResult};
use hrsfer::special::{db_to_linear, linear_to_db, uncoded_awgn_fer};
use hrsfer::threshold::{snr_threshold_legacy, Provenance, ThresholdEntry, ThresholdSet};

use super::compare::relative_error;
use super::threshold::CalibArgs;
use super::{parse_grid, Context};
use crate::calibrate::link_thresholds;
use crate::error::{invalid, CliResult};
use crate::plot::{write_fer_plot, Series, Style};
use crate::scenario::{grid_points, FrameUnit, GridKey, LinkSpec, DEFAULT_SEED};
use crate::table::Table;

/// Relay count whose AF-RS and PDF-RS curves are overlaid for case 4.
const OVERLAY_RELAYS: usize = 4;

/// Simulated FER below this is left out of the printed error summary.
const SUMMARY_MIN_FER: f64 = 1e-4;

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// Preset case, 0 to 7.
    pub case: u8,
    /// Directory for the report, plot and calibration files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// SNR grid in dB as START:STOP:STEP (default 0:40:2.5, coded 0:25:2.5).
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<GridKey>,
    /// Errors to collect per simulated point.
    #[arg(long, default_value_t = 100)]
    pub min_errors: u64,
    /// Frame cap per simulated point.
    #[arg(long, default_value_t = 200_000)]
    pub max_frames: u64,
    /// Stop a simulated sweep once its FER falls below this value.
    #[arg(long, default_value_t = 1e-5)]
    pub fer_floor: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Analytical curves only.
    #[arg(long)]
    pub no_sim: bool,
    #[command(flatten)]
    pub calib: CalibArgs,
}

struct Family<'a> {
    table: &'a mut Table,
    series: &'a mut Vec<Series>,
    color: usize,
    prefix: String,
    label: String,
}

impl Family<'_> {
    fn curve(&mut self, name: &str, style: Style, values: Vec<Option<f64>>) {
        let grid = &self.table.snr_db;
        self.series.push(Series {
            label: format!("{} {name}", self.label),
            style,
            color: self.color,
            points: grid
                .iter()
                .zip(&values)
                .filter_map(|(&x, v)| v.map(|y| (x, y)))
                .collect(),
        });
        self.table.push(format!("{}_{name}", self.prefix), values);
    }

    fn simulated(&mut self, result: &SimResult) {
        let len = self.table.snr_db.len();
        let pick = |f: fn(&hrsfer::montecarlo::Estimate) -> f64| {
            let mut v = vec![None; len];
            for (slot, p) in v.iter_mut().zip(&result.points) {
                *slot = Some(f(&p.estimate));
            }
            v
        };
        self.curve("sim", Style::Markers, pick(|e| e.fer));
        self.table
            .push(format!("{}_sim_ci_low", self.prefix), pick(|e| e.ci_low));
        self.table
            .push(format!("{}_sim_ci_high", self.prefix), pick(|e| e.ci_high));
    }

    /// Relative error columns of each model against the simulation.
    fn errors(&mut self, models: &[&str]) {
        let Some(sim) = self.table.column(&format!("{}_sim", self.prefix)).map(<[_]>::to_vec) else {
            return;
        };
        for m in models {
            let Some(model) = self.table.column(&format!("{}_{m}", self.prefix)).map(<[_]>::to_vec) else {
                continue;
            };
            let errs = model
                .iter()
                .zip(&sim)
                .map(|(a, s)| match (a, s) {
                    (Some(a), Some(s)) => relative_error(*a, *s),
                    _ => None,
                })
                .collect();
            self.table.push(format!("{}_relerr_{m}", self.prefix), errs);
        }
    }
}

fn default_grid(case: &CaseSpec) -> GridKey {
    let stop = if case.code.is_some() { 25.0 } else { 40.0 };
    GridKey {
        start: 0.0,
        stop,
        step: 2.5,
    }
}

pub fn run(args: &ReproduceArgs, ctx: &Context) -> CliResult<()> {
    let case = table_case(args.case)?;
    if args.min_errors == 0 || args.max_frames == 0 || !(args.fer_floor > 0.0) {
        return Err(invalid("simulation budget and fer floor must be positive"));
    }
    let grid = grid_points(args.grid.unwrap_or_else(|| default_grid(&case)))?;
    std::fs::create_dir_all(&args.out_dir)?;
    let stem = args.out_dir.join(format!("case{}", case.id));
    let campaign = ctx.campaign(args.seed, None);

    let link = LinkSpec::new(case.code.clone(), case.frame_symbols, FrameUnit::Symbols)?;
    let mut orders: Vec<u32> = CASE_RELAY_COUNTS.iter().map(|&n| n as u32).collect();
    if !case.is_mimo() {
        orders = std::iter::once(1).chain(orders.iter().map(|n| n + 1)).collect();
    }
    let (values, curve) = link_thresholds(&link, &orders, &args.calib.calibration()?, &campaign)?;
    let th = |d: u32| values[orders.iter().position(|&o| o == d).expect("order computed")];
    let mut set = ThresholdSet::default();
    for (&d, &g) in orders.iter().zip(&values) {
        set.push(ThresholdEntry {
            d,
            gamma_t: g,
            provenance: if curve.is_some() {
                Provenance::CurveCalibrated
            } else {
                Provenance::ClosedForm
            },
            source: None,
        });
    }
    set.write_csv(File::create(stem.with_extension("thresholds.csv"))?)?;
    if let Some(c) = &curve {
        c.save(&stem.with_extension("calibration.csv"))?;
    }
    println!("case {}: {}", case.id, link.describe());
    for (&d, &g) in orders.iter().zip(&values) {
        println!("  gamma_t(d={d}) = {:.3} dB", linear_to_db(g));
    }
    let legacy = case
        .is_mimo()
        .then(|| snr_threshold_legacy(|g| uncoded_awgn_fer(g, link.symbols, BPSK_MOD_CONST)))
        .transpose()?;

    let stop = StopRule {
        min_errors: args.min_errors,
        max_frames: args.max_frames,
    };
    let simulate = |n: usize, scheme: Option<Scheme>, seed: u64, importance: Option<f64>| -> CliResult<SimResult> {
        let mut s = case.scenario(n, scheme, grid.clone(), stop, seed)?;
        // importance sampling resolves FER far below the floor
        s.fer_floor = importance.is_none().then_some(args.fer_floor);
        s.importance = importance.map(|target_mean_snr| ImportanceSampling { target_mean_snr });
        log::info!("simulating {}", s.name);
        Ok(run_campaign(&s, &campaign)?)
    };

    let mut table = Table::new(grid.clone());
    let mut series = Vec::new();
    let mut color = 0;
    for &n in &CASE_RELAY_COUNTS {
        let mut fam = Family {
            table: &mut table,
            series: &mut series,
            color,
            prefix: format!("n{n}"),
            label: if case.is_mimo() {
                format!("N={n}")
            } else {
                format!("n={n}")
            },
        };
        color += 1;
        if case.is_mimo() {
            let d = n as u32;
            let over = |g: f64, f: fn(u32, u32, f64, f64) -> f64| {
                grid.iter().map(|&db| Some(f(1, d, db_to_linear(db), g))).collect()
            };
            fam.curve("analytical", Style::Line, over(th(d), mimo_fer_approx));
            fam.curve("asymptotic", Style::Dashed, over(th(d), mimo_fer_asymptotic));
            if let Some(l) = legacy {
                fam.curve("legacy", Style::Dashed, over(l, mimo_fer_approx));
            }
            if !args.no_sim {
                fam.simulated(&simulate(n, None, args.seed.wrapping_add(n as u64), Some(th(d)))?);
            }
            fam.errors(&["analytical", "asymptotic", "legacy"]);
        } else {
            let network = case.network(n, 1.0)?;
            let pts = relay_fer_sweep(RelayScheme::Hrs, &network, th(1), th(n as u32 + 1), &grid)?;
            fam.curve(
                "analytical",
                Style::Line,
                pts.iter().map(|p| Some(p.fer_analytical)).collect(),
            );
            fam.curve(
                "asymptotic",
                Style::Dashed,
                pts.iter().map(|p| Some(p.fer_asymptotic)).collect(),
            );
            if !args.no_sim {
                fam.simulated(&simulate(n, Some(Scheme::Hrs), args.seed.wrapping_add(n as u64), None)?);
            }
            fam.errors(&["analytical", "asymptotic"]);
        }
    }
    if case.id == 4 {
        let n = OVERLAY_RELAYS;
        let network = case.network(n, 1.0)?;
        for (k, (scheme, relay)) in [(Scheme::AfRs, RelayScheme::AfRs), (Scheme::PdfRs, RelayScheme::PdfRs)]
            .into_iter()
            .enumerate()
        {
            let tag = relay.label().replace('-', "").to_lowercase();
            let mut fam = Family {
                table: &mut table,
                series: &mut series,
                color,
                prefix: format!("n{n}_{tag}"),
                label: format!("n={n} {}", relay.label()),
            };
            color += 1;
            let pts = relay_fer_sweep(relay, &network, th(1), th(n as u32 + 1), &grid)?;
            fam.curve(
                "analytical",
                Style::Line,
                pts.iter().map(|p| Some(p.fer_analytical)).collect(),
            );
            fam.curve(
                "asymptotic",
                Style::Dashed,
                pts.iter().map(|p| Some(p.fer_asymptotic)).collect(),
            );
            if !args.no_sim {
                let seed = args.seed.wrapping_add(100 * (k as u64 + 1) + n as u64);
                fam.simulated(&simulate(n, Some(scheme), seed, None)?);
            }
            fam.errors(&["analytical", "asymptotic"]);
        }
    }

    let report = stem.with_extension("report.csv");
    table.write_csv(File::create(&report)?)?;
    let plot = stem.with_extension("fer.svg");
    write_fer_plot(&plot, &format!("case {}: average FER", case.id), &series)?;
    print_summary(&table, case.is_mimo());
    println!("wrote {} and {}", report.display(), plot.display());
    Ok(())
}

/// Worst relative error of each model against simulation, where the
/// simulated FER is at least `SUMMARY_MIN_FER`.
fn print_summary(table: &Table, mimo: bool) {
    let sims: Vec<String> = table
        .columns
        .iter()
        .filter_map(|(name, _)| name.strip_suffix("_sim").map(str::to_string))
        .collect();
    for prefix in sims {
        let sim = table.column(&format!("{prefix}_sim")).unwrap_or_default();
        let mut parts = Vec::new();
        for model in ["analytical", "asymptotic", "legacy"] {
            let Some(errs) = table.column(&format!("{prefix}_relerr_{model}")) else {
                continue;
            };
            let worst = errs
                .iter()
                .zip(sim)
                .filter(|(_, s)| s.is_some_and(|s| s >= SUMMARY_MIN_FER))
                .filter_map(|(e, _)| *e)
                .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
            if let Some(w) = worst {
                parts.push(format!("{model} {:.1}%", w * 100.0));
            }
        }
        if !parts.is_empty() {
            println!("  {prefix}: worst error vs simulation: {}", parts.join(", "));
        }
        if mimo {
            let (Some(prop), Some(old)) = (
                table.column(&format!("{prefix}_relerr_analytical")),
                table.column(&format!("{prefix}_relerr_legacy")),
            ) else {
                continue;
            };
            let (mut better, mut total) = (0, 0);
            for ((p, o), db) in prop.iter().zip(old).zip(&table.snr_db) {
                if let (Some(p), Some(o), true) = (p, o, *db >= 15.0) {
                    total += 1;
                    better += usize::from(p < o);
                }
            }
            println!("  {prefix}: proposed model closer than legacy at {better}/{total} points >= 15 dB");
        }
    }
}
