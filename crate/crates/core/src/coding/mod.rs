//! Convolutional coding, BPSK over AWGN, soft Viterbi decoding and the
//! instantaneous AWGN frame error rate curves derived from them.

mod awgn;
mod conv;
mod curve;
mod link;
mod viterbi;

pub use awgn::{bpsk_awgn, bpsk_awgn_into, slice};
pub use conv::{ConvCode, EncoderForm};
pub use curve::{measure_awgn_fer_curve, CalibrationBudget, CurveMeta, DbGrid, FerCurve};
pub use link::{crc16_bits, ErrorDetection, FrameLink, LinkCoding, RelayDecode};
pub use viterbi::{viterbi_decode, ViterbiDecoder};

pub use crate::special::uncoded_awgn_fer;
