use std::fs::File;
use std::path::PathBuf;

use clap::{ArgGroup, Args};
use hrsfer::coding::ConvCode;
use hrsfer::special::linear_to_db;
use hrsfer::threshold::{Provenance, ThresholdEntry, ThresholdSet};

use super::{parse_grid, Context};
use crate::calibrate::link_thresholds;
use crate::error::{invalid, CliResult};
use crate::scenario::{Calibration, FrameUnit, GridKey, LinkSpec, DEFAULT_SEED};

/// Budget of the AWGN calibration run for coded links.
#[derive(Debug, Clone, Args)]
pub struct CalibArgs {
    /// Errors to collect per calibration point.
    #[arg(long, default_value_t = 100)]
    pub calib_errors: u64,
    /// Frame cap per calibration point.
    #[arg(long, default_value_t = 1_000_000)]
    pub calib_frames: u64,
    /// End the calibration sweep once the FER drops below this value.
    #[arg(long, default_value_t = 1e-4)]
    pub calib_stop_fer: f64,
    /// Calibration grid in dB as START:STOP:STEP.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "-6:10:0.25")]
    pub calib_grid: GridKey,
}

impl CalibArgs {
    pub fn calibration(&self) -> CliResult<Calibration> {
        if self.calib_errors == 0 || self.calib_frames == 0 {
            return Err(invalid("calibration budget must be positive"));
        }
        let mut c = Calibration::default();
        c.budget.min_errors = self.calib_errors;
        c.budget.max_frames = self.calib_frames;
        c.budget.stop_below_fer = Some(self.calib_stop_fer);
        c.grid.start = self.calib_grid.start;
        c.grid.stop = self.calib_grid.stop;
        c.grid.step = self.calib_grid.step;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("link").required(true).args(["uncoded", "code"])))]
pub struct ThresholdArgs {
    /// Uncoded BPSK; thresholds come from the closed form.
    #[arg(long)]
    pub uncoded: bool,
    /// Convolutional code as octal generators, e.g. 5,7 or "23,35,0;0,5,13".
    #[arg(long, value_name = "GENERATORS")]
    pub code: Option<String>,
    /// Frame length.
    #[arg(short = 'L', long = "frame-len")]
    pub frame_len: usize,
    /// Unit of the frame length for coded links.
    #[arg(long, value_enum, default_value_t = FrameUnit::Symbols)]
    pub frame_unit: FrameUnit,
    /// Diversity orders, comma separated.
    #[arg(short = 'd', long = "diversity", value_delimiter = ',', default_value = "1")]
    pub orders: Vec<u32>,
    /// Write the thresholds as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the measured AWGN curve as CSV (coded links).
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    /// Seed of the calibration run.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub calib: CalibArgs,
}

pub fn run(args: &ThresholdArgs, ctx: &Context) -> CliResult<()> {
    if args.orders.contains(&0) {
        return Err(invalid("diversity orders start at 1"));
    }
    let code = args.code.as_deref().map(ConvCode::from_octal).transpose()?;
    let link = LinkSpec::new(code, args.frame_len, args.frame_unit)?;
    let campaign = ctx.campaign(args.seed, None);
    let (values, curve) = link_thresholds(&link, &args.orders, &args.calib.calibration()?, &campaign)?;

    let provenance = if curve.is_some() {
        Provenance::CurveCalibrated
    } else {
        Provenance::ClosedForm
    };
    let mut set = ThresholdSet::default();
    println!("{}", link.describe());
    for (&d, &g) in args.orders.iter().zip(&values) {
        println!("d={d}: {:.3} dB ({g:.6} linear)", linear_to_db(g));
        set.push(ThresholdEntry {
            d,
            gamma_t: g,
            provenance,
            source: None,
        });
    }
    if let Some(path) = &args.out {
        set.write_csv(File::create(path)?)?;
    }
    match (&args.curve_out, &curve) {
        (Some(path), Some(c)) => c.save(path)?,
        (Some(_), None) => log::warn!("--curve-out ignored: uncoded thresholds need no calibration"),
        _ => {}
    }
    Ok(())
}
