pub mod compare;
pub mod reproduce;
pub mod run;
pub mod threshold;

use std::fs::File;
use std::io::Write;
use std::path::Path;

use hrsfer::montecarlo::Campaign;

use crate::error::CliResult;
use crate::scenario::GridKey;

/// Frames per Monte-Carlo block. Results depend on it, so it is fixed.
pub const BLOCK_SIZE: u64 = 2_000;

/// Settings shared by all subcommands.
#[derive(Debug, Clone, Copy, Default)]
pub struct Context {
    /// From `--threads` or `HRSFER_THREADS`.
    pub threads: Option<usize>,
}

impl Context {
    /// Command-line threads win over the scenario file; without either, all
    /// available cores are used. Results do not depend on the thread count.
    pub fn campaign(&self, seed: u64, scenario_threads: Option<usize>) -> Campaign {
        let threads = self
            .threads
            .or(scenario_threads)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
        Campaign::new(seed, BLOCK_SIZE, threads)
    }
}

pub fn parse_grid(s: &str) -> Result<GridKey, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(format!("expected START:STOP:STEP, got `{s}`"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    let g = GridKey {
        start: num(start)?,
        stop: num(stop)?,
        step: num(step)?,
    };
    if !(g.step > 0.0) || g.stop < g.start {
        return Err(format!("grid `{s}` needs START <= STOP and STEP > 0"));
    }
    Ok(g)
}

/// File at `path`, or standard output.
pub fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}
