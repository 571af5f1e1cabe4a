//! Special functions and unit conversions shared by the analysis and the
//! link-level models.

use statrs::function::gamma::gamma_lr;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
///
/// Evaluated through the complementary error function so that the relative
/// accuracy is preserved deep in the tail (`Q(10) ~ 7.6e-24`).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Frame error probability of an uncoded frame of `frame_len` symbols over
/// AWGN at instantaneous SNR `snr`: `1 - (1 - Q(sqrt(c*snr)))^L`.
pub fn uncoded_awgn_fer(snr: f64, frame_len: usize, mod_const: f64) -> f64 {
    let p = q_function((mod_const * snr.max(0.0)).sqrt());
    // 1 - (1-p)^L without losing the small-p regime
    -f64::exp_m1(frame_len as f64 * f64::ln_1p(-p))
}

/// `1 - exp(-x)` for `x >= 0`.
#[inline]
pub fn one_minus_exp_neg(x: f64) -> f64 {
    -f64::exp_m1(-x)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(a, x)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
