use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the generator polynomials are turned into an encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum EncoderForm {
    /// Plain shift-register encoder; every output is a generator applied to
    /// the input window.
    #[default]
    Feedforward,
    /// Rate-1/n recursive systematic encoder. The generator at `feedback`
    /// filters the register input, the first output is the information bit
    /// and the remaining generators produce the parity bits.
    RecursiveSystematic { feedback: usize },
}

/// Binary convolutional code described by a `k_in x n_out` matrix of octal
/// generator polynomials.
///
/// Polynomials are right-justified: for an input whose register has memory
/// `m`, bit `m` of a generator taps the current input bit and bit `0` taps the
/// oldest stored bit. The memory of each input is the largest polynomial
/// degree in its row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvCode {
    generators: Vec<Vec<u32>>,
    memory: Vec<usize>,
    form: EncoderForm,
    n_out: usize,
    // state layout: input j occupies bits [offset[j], offset[j] + memory[j])
    offsets: Vec<usize>,
    next_state: Vec<u32>,
    outputs: Vec<u32>,
    tail_input: Vec<u32>,
}

fn bit_len(x: u32) -> usize {
    (u32::BITS - x.leading_zeros()) as usize
}

fn parity(x: u32) -> u32 {
    x.count_ones() & 1
}

impl ConvCode {
    pub fn new(generators: Vec<Vec<u32>>) -> Result<Self> {
        Self::with_form(generators, EncoderForm::Feedforward)
    }

    pub fn with_form(generators: Vec<Vec<u32>>, form: EncoderForm) -> Result<Self> {
        let k_in = generators.len();
        if k_in == 0 {
            return Err(Error::InvalidCode("generator matrix has no rows".into()));
        }
        let n_out = generators[0].len();
        if n_out == 0 || generators.iter().any(|row| row.len() != n_out) {
            return Err(Error::InvalidCode(
                "generator rows must be non-empty and of equal length".into(),
            ));
        }
        if k_in >= n_out {
            return Err(Error::InvalidCode(format!("rate {k_in}/{n_out} is not below one")));
        }
        for o in 0..n_out {
            if generators.iter().all(|row| row[o] == 0) {
                return Err(Error::InvalidCode(format!("output {o} has no taps")));
            }
        }
        let memory: Vec<usize> = generators
            .iter()
            .map(|row| row.iter().map(|&g| bit_len(g)).max().unwrap_or(0).saturating_sub(1))
            .collect();
        let total_memory: usize = memory.iter().sum();
        if total_memory > 16 {
            return Err(Error::InvalidCode(format!("total memory {total_memory} exceeds 16")));
        }
        if let EncoderForm::RecursiveSystematic { feedback } = form {
            if k_in != 1 {
                return Err(Error::InvalidCode(
                    "recursive systematic form requires one input".into(),
                ));
            }
            if feedback >= n_out {
                return Err(Error::InvalidCode(format!("feedback index {feedback} out of range")));
            }
            let fb = generators[0][feedback];
            if fb >> memory[0] & 1 == 0 {
                return Err(Error::InvalidCode(
                    "feedback polynomial must tap the current input".into(),
                ));
            }
        }
        let mut offsets = Vec::with_capacity(k_in);
        let mut acc = 0;
        for &m in &memory {
            offsets.push(acc);
            acc += m;
        }
        let mut code = Self {
            generators,
            memory,
            form,
            n_out,
            offsets,
            next_state: Vec::new(),
            outputs: Vec::new(),
            tail_input: Vec::new(),
        };
        code.build_trellis();
        Ok(code)
    }

    /// Parse a generator matrix such as `"5,7"` or `"23,35,0;0,5,13"` (octal).
    pub fn from_octal(spec: &str) -> Result<Self> {
        let rows = spec
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|g| {
                        u32::from_str_radix(g.trim(), 8)
                            .map_err(|_| Error::InvalidCode(format!("'{}' is not an octal polynomial", g.trim())))
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Rate-1/2, memory-2 code with generators (5, 7) octal.
    pub fn rate_half_5_7() -> Self {
        Self::new(vec![vec![0o5, 0o7]]).expect("valid code")
    }

    /// Rate-2/3 code with generator matrix (23, 35, 0; 0, 5, 13) octal.
    pub fn rate_two_thirds() -> Self {
        Self::new(vec![vec![0o23, 0o35, 0], vec![0, 0o5, 0o13]]).expect("valid code")
    }

    pub fn k_in(&self) -> usize {
        self.generators.len()
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn memory(&self) -> &[usize] {
        &self.memory
    }

    /// Number of zero-tail steps needed to flush every register.
    pub fn tail_steps(&self) -> usize {
        self.memory.iter().copied().max().unwrap_or(0)
    }

    pub fn states(&self) -> usize {
        1 << self.memory.iter().sum::<usize>()
    }

    pub fn form(&self) -> EncoderForm {
        self.form
    }

    pub fn generators(&self) -> &[Vec<u32>] {
        &self.generators
    }

    /// Generator matrix in the octal notation accepted by [`ConvCode::from_octal`].
    pub fn octal_id(&self) -> String {
        self.generators
            .iter()
            .map(|row| row.iter().map(|g| format!("{g:o}")).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn rate(&self) -> f64 {
        self.k_in() as f64 / self.n_out as f64
    }

    /// Coded length for `info_len` information bits, tail included.
    pub fn coded_len(&self, info_len: usize) -> usize {
        (info_len / self.k_in() + self.tail_steps()) * self.n_out
    }

    /// Largest information length whose terminated codeword fits in
    /// `symbols` channel symbols.
    pub fn info_len_for_symbols(&self, symbols: usize) -> Result<usize> {
        let steps = symbols / self.n_out;
        if steps <= self.tail_steps() {
            return Err(Error::InvalidCode(format!(
                "{symbols} symbols cannot hold a terminated codeword of {}",
                self.octal_id()
            )));
        }
        Ok((steps - self.tail_steps()) * self.k_in())
    }

    #[inline]
    pub(crate) fn transition(&self, state: usize, input: usize) -> (usize, u32) {
        let idx = (state << self.k_in()) | input;
        (self.next_state[idx] as usize, self.outputs[idx])
    }

    #[inline]
    pub(crate) fn tail_input(&self, state: usize) -> usize {
        self.tail_input[state] as usize
    }

    fn step(&self, state: u32, input: u32) -> (u32, u32, u32) {
        let mut next = 0u32;
        let mut out = 0u32;
        let mut tail = 0u32;
        match self.form {
            EncoderForm::Feedforward => {
                for (j, row) in self.generators.iter().enumerate() {
                    let m = self.memory[j];
                    let reg = (state >> self.offsets[j]) & ((1 << m) - 1);
                    let window = ((input >> j) & 1) << m | reg;
                    for (o, &g) in row.iter().enumerate() {
                        out ^= parity(g & window) << o;
                    }
                    next |= (window >> 1) << self.offsets[j];
                }
            }
            EncoderForm::RecursiveSystematic { feedback } => {
                let m = self.memory[0];
                let row = &self.generators[0];
                let reg = state & ((1 << m) - 1);
                let fb_taps = row[feedback] & ((1 << m) - 1);
                let fb = parity(fb_taps & reg);
                let u = input & 1;
                let w = u ^ fb;
                let window = w << m | reg;
                out |= u;
                let mut o = 1;
                for (idx, &g) in row.iter().enumerate() {
                    if idx == feedback {
                        continue;
                    }
                    out |= parity(g & window) << o;
                    o += 1;
                }
                next = window >> 1;
                tail = fb;
            }
        }
        (next, out, tail)
    }

    fn build_trellis(&mut self) {
        let states = self.states();
        let k = self.k_in();
        let inputs = 1usize << k;
        self.next_state = vec![0; states * inputs];
        self.outputs = vec![0; states * inputs];
        self.tail_input = vec![0; states];
        for s in 0..states {
            for u in 0..inputs {
                let (next, out, tail) = self.step(s as u32, u as u32);
                self.next_state[(s << k) | u] = next;
                self.outputs[(s << k) | u] = out;
                self.tail_input[s] = tail;
            }
        }
    }

    /// Encode `info` from the all-zero state and append the terminating tail.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.coded_len(info.len()));
        self.encode_into(info, &mut out)?;
        Ok(out)
    }

    pub fn encode_into(&self, info: &[u8], out: &mut Vec<u8>) -> Result<()> {
        let k = self.k_in();
        if !info.len().is_multiple_of(k) {
            return Err(Error::LengthMismatch {
                expected: info.len().div_ceil(k) * k,
                actual: info.len(),
            });
        }
        out.clear();
        let mut state = 0usize;
        let emit = |bits: u32, out: &mut Vec<u8>| {
            for o in 0..self.n_out {
                out.push(((bits >> o) & 1) as u8);
            }
        };
        for chunk in info.chunks_exact(k) {
            let input = chunk
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &b)| acc | ((b as usize & 1) << j));
            let (next, bits) = self.transition(state, input);
            emit(bits, out);
            state = next;
        }
        for _ in 0..self.tail_steps() {
            let (next, bits) = self.transition(state, self.tail_input(state));
            emit(bits, out);
            state = next;
        }
        debug_assert_eq!(state, 0, "tail must return the encoder to the zero state");
        Ok(())
    }
}
