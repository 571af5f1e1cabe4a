//! Frame error rate analysis and simulation of hybrid decode/amplify-and-forward
//! relay selection over block Rayleigh fading.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cases;
pub mod channel;
pub mod coding;
pub mod error;
pub mod interp;
pub mod isotonic;
pub mod montecarlo;
pub mod quadrature;
pub mod simulator;
pub mod special;
pub mod threshold;

pub use error::{Error, Result};
