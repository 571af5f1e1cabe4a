//! Reproducible block-parallel Monte-Carlo engine.
//!
//! Frames are simulated in fixed-size blocks. Block `b` of point `p` draws from
//! its own ChaCha12 stream, keyed by the master seed with stream id
//! `(p << 32) | b`. Blocks are evaluated in parallel waves and the stop rule is
//! applied to the ordered block prefix, so totals depend only on
//! `(seed, block size)` and never on the number of worker threads.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type SimRng = ChaCha12Rng;

/// Stop rule for a single SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_errors: 200,
            max_frames: 2_000_000,
        }
    }
}

/// Counts accumulated over a block of frames.
///
/// `weight_sum` and `weight_sq_sum` carry importance weights of error frames;
/// for unweighted simulations every error frame has weight one.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub frames: u64,
    pub errors: u64,
    pub weight_sum: f64,
    pub weight_sq_sum: f64,
}

impl Tally {
    pub fn record(&mut self, error_weight: f64) {
        self.frames += 1;
        if error_weight > 0.0 {
            self.errors += 1;
            self.weight_sum += error_weight;
            self.weight_sq_sum += error_weight * error_weight;
        }
    }

    pub fn absorb(&mut self, other: &Tally) {
        self.frames += other.frames;
        self.errors += other.errors;
        self.weight_sum += other.weight_sum;
        self.weight_sq_sum += other.weight_sq_sum;
    }
}

/// FER estimate for one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub frames: u64,
    pub errors: u64,
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Stop rule ended on `max_frames` before reaching `min_errors`.
    pub exhausted: bool,
    pub elapsed_secs: f64,
}

const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95 % confidence.
pub fn wilson_interval(errors: u64, frames: u64) -> (f64, f64) {
    if frames == 0 {
        return (0.0, 1.0);
    }
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl Estimate {
    fn from_tally(t: &Tally, weighted: bool, exhausted: bool, elapsed_secs: f64) -> Self {
        let n = t.frames.max(1) as f64;
        let (fer, ci_low, ci_high) = if weighted {
            let mean = t.weight_sum / n;
            let var = (t.weight_sq_sum / n - mean * mean).max(0.0);
            let half = Z_95 * (var / n).sqrt();
            (mean, (mean - half).max(0.0), mean + half)
        } else {
            let (lo, hi) = wilson_interval(t.errors, t.frames);
            (t.errors as f64 / n, lo, hi)
        };
        Self {
            frames: t.frames,
            errors: t.errors,
            fer,
            ci_low,
            ci_high,
            exhausted,
            elapsed_secs,
        }
    }
}

/// Derive the random stream for `(seed, point, block)`.
pub fn block_stream(seed: u64, point: u32, block: u32) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | block as u64);
    rng
}

/// Block-parallel Monte-Carlo runner.
#[derive(Clone)]
pub struct Campaign {
    seed: u64,
    block_size: u64,
    threads: usize,
    pool: Arc<rayon::ThreadPool>,
}

impl std::fmt::Debug for Campaign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Campaign")
            .field("seed", &self.seed)
            .field("block_size", &self.block_size)
            .field("threads", &self.threads)
            .finish()
    }
}

impl Campaign {
    pub fn new(seed: u64, block_size: u64, threads: usize) -> Self {
        let threads = threads.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build worker pool");
        Self {
            seed,
            block_size: block_size.max(1),
            threads,
            pool: Arc::new(pool),
        }
    }

    /// Same worker pool and block size, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn block_size(&self) -> u64 {
        self.block_size
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Simulate point `point` until the stop rule fires.
    ///
    /// `block` runs the requested number of frames from the given stream and
    /// returns their tally. Set `weighted` when the tally carries importance
    /// weights; the estimate then uses the weighted mean and a normal interval.
    pub fn run_point<F>(&self, point: u32, stop: StopRule, weighted: bool, block: F) -> Estimate
    where
        F: Fn(&mut SimRng, u64) -> Tally + Sync,
    {
        let start = Instant::now();
        let total_blocks = stop.max_frames.div_ceil(self.block_size);
        let wave = (self.threads as u64 * 2).max(1);
        let mut total = Tally::default();
        let mut next_block = 0u64;
        let mut done = stop.max_frames == 0;
        while !done && next_block < total_blocks {
            let end = (next_block + wave).min(total_blocks);
            let ids: Vec<u64> = (next_block..end).collect();
            let tallies: Vec<Tally> = self.pool.install(|| {
                ids.par_iter()
                    .map(|&b| {
                        let frames = self.block_size.min(stop.max_frames - b * self.block_size);
                        let mut rng = block_stream(self.seed, point, b as u32);
                        block(&mut rng, frames)
                    })
                    .collect()
            });
            for t in &tallies {
                total.absorb(t);
                if total.errors >= stop.min_errors || total.frames >= stop.max_frames {
                    done = true;
                    break;
                }
            }
            next_block = end;
        }
        let exhausted = total.errors < stop.min_errors;
        Estimate::from_tally(&total, weighted, exhausted, start.elapsed().as_secs_f64())
    }
}
