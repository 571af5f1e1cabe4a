use super::conv::ConvCode;
use crate::error::{Error, Result};

/// Soft-decision Viterbi decoder for zero-terminated codewords.
///
/// Received samples are BPSK values where bit 0 maps to +1 and bit 1 to -1.
/// Branch metrics are squared Euclidean distances; among equal-metric paths
/// entering a state the one from the lower-index predecessor survives.
/// Scratch buffers are kept between calls.
#[derive(Debug, Clone)]
pub struct ViterbiDecoder {
    code: ConvCode,
    // incoming branches of state s occupy [s * fan_in, (s + 1) * fan_in),
    // ordered by (predecessor, input); short lists are padded with branches
    // from the sentinel state `states`, whose metric stays infinite
    fan_in: usize,
    pred_from: Vec<u32>,
    pred_input: Vec<u32>,
    pred_bits: Vec<u32>,
    // as pred_bits, with branches not allowed in the tail pointing at the
    // infinite branch metric
    pred_bits_tail: Vec<u32>,
    metrics: Vec<f64>,
    next_metrics: Vec<f64>,
    // survivors[t * states + s] = index of the winning incoming branch
    survivors: Vec<u32>,
    branch: Vec<f64>,
}

impl ViterbiDecoder {
    pub fn new(code: &ConvCode) -> Self {
        let states = code.states();
        let inputs = 1usize << code.k_in();
        let patterns = 1usize << code.n_out();
        let mut incoming: Vec<Vec<(u32, u32, u32, bool)>> = vec![Vec::new(); states];
        for s in 0..states {
            for u in 0..inputs {
                let (ns, bits) = code.transition(s, u);
                incoming[ns].push((s as u32, u as u32, bits, code.tail_input(s) == u));
            }
        }
        let fan_in = incoming.iter().map(Vec::len).max().unwrap_or(0);
        let mut dec = Self {
            code: code.clone(),
            fan_in,
            pred_from: Vec::with_capacity(states * fan_in),
            pred_input: Vec::with_capacity(states * fan_in),
            pred_bits: Vec::with_capacity(states * fan_in),
            pred_bits_tail: Vec::with_capacity(states * fan_in),
            metrics: vec![f64::INFINITY; states + 1],
            next_metrics: vec![f64::INFINITY; states + 1],
            survivors: Vec::new(),
            branch: vec![f64::INFINITY; patterns + 1],
        };
        for list in incoming {
            for j in 0..fan_in {
                let (from, input, bits, is_tail) = list.get(j).copied().unwrap_or((states as u32, 0, 0, false));
                dec.pred_from.push(from);
                dec.pred_input.push(input);
                dec.pred_bits.push(bits);
                dec.pred_bits_tail.push(if is_tail { bits } else { patterns as u32 });
            }
        }
        dec
    }

    pub fn code(&self) -> &ConvCode {
        &self.code
    }

    /// Information length carried by a received block of `received_len` samples.
    pub fn info_len(&self, received_len: usize) -> Result<usize> {
        let n = self.code.n_out();
        let tail = self.code.tail_steps();
        if !received_len.is_multiple_of(n) || received_len / n < tail {
            let steps = (received_len / n).max(tail);
            return Err(Error::LengthMismatch {
                expected: steps * n,
                actual: received_len,
            });
        }
        Ok((received_len / n - tail) * self.code.k_in())
    }

    pub fn decode(&mut self, received: &[f64]) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.decode_into(received, &mut out)?;
        Ok(out)
    }

    pub fn decode_into(&mut self, received: &[f64], out: &mut Vec<u8>) -> Result<()> {
        let info_len = self.info_len(received.len())?;
        let n = self.code.n_out();
        let k = self.code.k_in();
        let states = self.code.states();
        let info_steps = info_len / k;
        let steps = received.len() / n;

        self.survivors.clear();
        self.survivors.resize(steps * states, 0);
        self.metrics.fill(f64::INFINITY);
        self.metrics[0] = 0.0;
        let fan = self.fan_in;

        for t in 0..steps {
            let r = &received[t * n..(t + 1) * n];
            for (pattern, metric) in self.branch[..1 << n].iter_mut().enumerate() {
                *metric = r
                    .iter()
                    .enumerate()
                    .map(|(o, &y)| {
                        let x = if (pattern >> o) & 1 == 0 { 1.0 } else { -1.0 };
                        (y - x) * (y - x)
                    })
                    .sum();
            }
            let bits_table = if t >= info_steps {
                &self.pred_bits_tail
            } else {
                &self.pred_bits
            };
            let metrics = &self.metrics;
            let branch = &self.branch;
            let surv = &mut self.survivors[t * states..(t + 1) * states];
            let groups = self.pred_from.chunks_exact(fan).zip(bits_table.chunks_exact(fan));
            for (ns, ((from, bits), (next, entry))) in groups
                .zip(self.next_metrics.iter_mut().zip(surv.iter_mut()))
                .enumerate()
            {
                let mut best = f64::INFINITY;
                let mut best_j = 0;
                for (j, (&f, &b)) in from.iter().zip(bits).enumerate() {
                    let cand = metrics[f as usize] + branch[b as usize];
                    if cand < best {
                        best = cand;
                        best_j = j;
                    }
                }
                *next = best;
                *entry = (ns * fan + best_j) as u32;
            }
            std::mem::swap(&mut self.metrics, &mut self.next_metrics);
        }

        out.clear();
        out.resize(info_len, 0);
        let mut state = 0usize;
        for t in (0..steps).rev() {
            let entry = self.survivors[t * states + state] as usize;
            let input = self.pred_input[entry] as usize;
            if t < info_steps {
                for j in 0..k {
                    out[t * k + j] = ((input >> j) & 1) as u8;
                }
            }
            state = self.pred_from[entry] as usize;
        }
        Ok(())
    }
}

/// One-shot decode; prefer [`ViterbiDecoder`] in loops.
pub fn viterbi_decode(code: &ConvCode, received: &[f64]) -> Result<Vec<u8>> {
    ViterbiDecoder::new(code).decode(received)
}
