use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::awgn::bpsk_awgn_into;
use super::conv::ConvCode;
use super::viterbi::ViterbiDecoder;
use crate::special::uncoded_awgn_fer;

/// Channel coding applied on every hop.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkCoding {
    /// Uncoded BPSK; frame errors drawn from the exact uncoded frame error
    /// probability.
    Uncoded,
    /// Uncoded BPSK simulated bit by bit with hard decisions.
    UncodedBitExact,
    /// Convolutionally coded BPSK with soft Viterbi decoding.
    Coded(ConvCode),
}

/// How a relay decides whether it decoded the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorDetection {
    /// Compare the decoded bits with the transmitted ones (ideal CRC).
    #[default]
    Genie,
    /// CRC-16/CCITT over the first `L - 16` information bits, carried in the
    /// last 16. Only meaningful for coded links.
    Crc16,
}

/// Outcome of a relay decoding attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayDecode {
    Correct,
    /// Decoding failed and the relay knows it.
    Detected,
    /// Decoding failed but the check passed.
    Undetected,
}

/// Frame-level AWGN link: decides whether a frame sent at a given
/// instantaneous SNR is received in error. Holds reusable scratch buffers.
#[derive(Debug, Clone)]
pub struct FrameLink {
    frame_len: usize,
    mod_const: f64,
    detection: ErrorDetection,
    coding: LinkCoding,
    decoder: Option<ViterbiDecoder>,
    info: Vec<u8>,
    coded: Vec<u8>,
    received: Vec<f64>,
    decoded: Vec<u8>,
}

/// CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF) over a bit sequence.
pub fn crc16_bits(bits: &[u8]) -> u16 {
    let mut crc = 0xFFFFu16;
    for &b in bits {
        let top = ((crc >> 15) as u8 & 1) ^ (b & 1);
        crc <<= 1;
        if top == 1 {
            crc ^= 0x1021;
        }
    }
    crc
}

impl FrameLink {
    pub fn new(coding: LinkCoding, frame_len: usize) -> Self {
        let decoder = match &coding {
            LinkCoding::Coded(code) => Some(ViterbiDecoder::new(code)),
            _ => None,
        };
        Self {
            frame_len,
            mod_const: 2.0,
            detection: ErrorDetection::Genie,
            coding,
            decoder,
            info: Vec::with_capacity(frame_len),
            coded: Vec::new(),
            received: Vec::new(),
            decoded: Vec::with_capacity(frame_len),
        }
    }

    pub fn with_detection(mut self, detection: ErrorDetection) -> Self {
        self.detection = detection;
        self
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn coding(&self) -> &LinkCoding {
        &self.coding
    }

    /// Send one frame at instantaneous SNR `snr`; true when any information bit
    /// is wrong after decoding.
    pub fn frame_error<R: Rng + ?Sized>(&mut self, snr: f64, rng: &mut R) -> bool {
        match self.coding {
            LinkCoding::Uncoded => rng.random::<f64>() < uncoded_awgn_fer(snr, self.frame_len, self.mod_const),
            LinkCoding::UncodedBitExact => {
                if snr <= 0.0 {
                    return (0..self.frame_len).any(|_| rng.random::<bool>());
                }
                let sigma = (0.5 / snr).sqrt();
                let mut error = false;
                // draw every bit so the stream advances by a fixed amount
                for _ in 0..self.frame_len {
                    let n: f64 = StandardNormal.sample(rng);
                    error |= 1.0 + sigma * n < 0.0;
                }
                error
            }
            LinkCoding::Coded(_) => {
                self.transmit_coded(snr, rng);
                self.info != self.decoded
            }
        }
    }

    /// Relay-side decode with the configured error detection.
    pub fn relay_decode<R: Rng + ?Sized>(&mut self, snr: f64, rng: &mut R) -> RelayDecode {
        if self.detection == ErrorDetection::Crc16 && matches!(self.coding, LinkCoding::Coded(_)) {
            self.transmit_coded(snr, rng);
            let wrong = self.info != self.decoded;
            let split = self.frame_len.saturating_sub(16);
            let crc = crc16_bits(&self.decoded[..split]);
            let carried = self.decoded[split..].iter().fold(0u16, |acc, &b| (acc << 1) | b as u16);
            return match (wrong, crc == carried) {
                (false, _) => RelayDecode::Correct,
                (true, true) => RelayDecode::Undetected,
                (true, false) => RelayDecode::Detected,
            };
        }
        if self.frame_error(snr, rng) {
            RelayDecode::Detected
        } else {
            RelayDecode::Correct
        }
    }

    fn transmit_coded<R: Rng + ?Sized>(&mut self, snr: f64, rng: &mut R) {
        let LinkCoding::Coded(code) = &self.coding else {
            unreachable!("coded transmission on an uncoded link");
        };
        self.info.clear();
        self.info.extend((0..self.frame_len).map(|_| rng.random_range(0..2u8)));
        if self.detection == ErrorDetection::Crc16 && self.frame_len > 16 {
            let split = self.frame_len - 16;
            let crc = crc16_bits(&self.info[..split]);
            for (i, bit) in self.info[split..].iter_mut().enumerate() {
                *bit = ((crc >> (15 - i)) & 1) as u8;
            }
        }
        code.encode_into(&self.info, &mut self.coded)
            .expect("frame length must be a multiple of the code's input width");
        bpsk_awgn_into(&self.coded, snr, rng, &mut self.received);
        self.decoder
            .as_mut()
            .expect("coded link has a decoder")
            .decode_into(&self.received, &mut self.decoded)
            .expect("received block length matches the codeword");
    }
}
