//! Closed-form FER of hybrid relay selection (HRS) and its AF-RS / PDF-RS
//! relatives under the outage-style threshold approximation.
//!
//! Relay `i` contributes an exponential branch with rate
//! `kappa_i = (gamma_t1 / gamma_td) * lambda1_i + lambda2_i` below the
//! destination threshold; the best relay is the maximum of these branches and
//! the destination adds the direct link. The FER is the CDF of that sum at
//! `gamma_td`, written as an alternating sum over non-empty relay subsets.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channel::{lambda_params, Lambdas, NetworkConfig};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::special::{db_to_linear, one_minus_exp_neg, uncoded_awgn_fer, CompensatedSum};

/// Largest relay count accepted by the subset enumeration (2^24 - 1 terms).
pub const MAX_ENUMERATED_RELAYS: usize = 24;

/// `|lambda0 - C2| / lambda0` below which the analytic limit term is used.
const LIMIT_BRANCH_REL: f64 = 1e-9;

/// Rates and thresholds feeding the FER expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub lambdas: Lambdas,
    /// Relay decoding threshold (diversity order one).
    pub gamma_t1: f64,
    /// Destination threshold for diversity order `n + 1`.
    pub gamma_td: f64,
}

impl SchemeParams {
    pub fn new(lambdas: Lambdas, gamma_t1: f64, gamma_td: f64) -> Result<Self> {
        let n = lambdas.relays();
        if n == 0 || lambdas.lambda2.len() != n {
            return Err(Error::InvalidParams("need matching, non-empty relay rate lists".into()));
        }
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !(lambdas.lambda0.is_finite() && lambdas.lambda0 > 0.0)
            || !lambdas.lambda1.iter().all(|&l| ok(l))
            || !lambdas.lambda2.iter().all(|&l| l.is_finite() && l > 0.0)
        {
            return Err(Error::InvalidParams("rates must be finite and positive".into()));
        }
        if !(gamma_t1.is_finite() && gamma_t1 > 0.0 && gamma_td.is_finite() && gamma_td > 0.0) {
            return Err(Error::InvalidParams("thresholds must be finite and positive".into()));
        }
        if gamma_t1 > gamma_td * (1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "relay threshold {gamma_t1} exceeds destination threshold {gamma_td}"
            )));
        }
        Ok(Self {
            lambdas,
            gamma_t1,
            gamma_td,
        })
    }

    /// Parameters of `cfg` at its average SNR.
    pub fn from_network(cfg: &NetworkConfig, gamma_t1: f64, gamma_td: f64) -> Result<Self> {
        Self::new(lambda_params(cfg), gamma_t1, gamma_td)
    }

    pub fn relays(&self) -> usize {
        self.lambdas.relays()
    }

    pub fn threshold_ratio(&self) -> f64 {
        self.gamma_t1 / self.gamma_td
    }

    /// Effective exponential rate of relay branch `i` below `gamma_td`.
    pub fn branch_rate(&self, i: usize) -> f64 {
        self.threshold_ratio() * self.lambdas.lambda1[i] + self.lambdas.lambda2[i]
    }

    fn branch_rates(&self) -> Vec<f64> {
        (0..self.relays()).map(|i| self.branch_rate(i)).collect()
    }
}

/// `m(x) = 1 - (1 - e^-x) / x`.
fn m_fn(x: f64) -> f64 {
    if x < 0.5 {
        // sum_{k>=1} (-1)^(k+1) x^k / (k+1)!
        let mut term = x / 2.0;
        let mut sum = 0.0;
        for k in 1..30 {
            sum += term;
            term *= -x / (k as f64 + 2.0);
        }
        sum
    } else {
        1.0 + f64::exp_m1(-x) / x
    }
}

/// `m'(x) = (1 - e^-x (1 + x)) / x^2`.
fn m_prime(x: f64) -> f64 {
    if x < 0.5 {
        // sum_{k>=0} (-1)^k (k+1) x^k / (k+2)!
        let mut power = 0.5; // x^k / (k+2)!
        let mut sum = 0.0;
        for k in 0..30 {
            let kf = k as f64;
            sum += (kf + 1.0) * power;
            power *= -x / (kf + 3.0);
        }
        sum
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (x * x)
    }
}

#[allow(clippy::excessive_precision)]
const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_804_939_476_142_360_184,
    0.525_532_409_916_328_985_817_739_049_189_254,
    0.796_666_477_413_626_739_591_553_936_475_830,
    0.960_289_856_497_536_231_683_560_868_569_473,
];
#[allow(clippy::excessive_precision)]
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_361_982_965_150_449_277_196,
    0.313_706_645_877_887_287_337_962_201_986_601,
    0.222_381_034_453_374_470_544_355_994_426_241,
    0.101_228_536_290_376_259_152_531_354_309_962,
];

/// Divided difference `(m(b) - m(a)) / (b - a)`, stable as `b -> a`.
fn m_divided_difference(a: f64, b: f64) -> f64 {
    let delta = b - a;
    if delta.abs() > 1.0 {
        return (m_fn(b) - m_fn(a)) / delta;
    }
    // mean of m' over [a, b] by 8-point Gauss-Legendre
    let mid = 0.5 * (a + b);
    let half = 0.5 * delta;
    GL8_NODES
        .iter()
        .zip(GL8_WEIGHTS)
        .map(|(&x, w)| w * (m_prime(mid - half * x) + m_prime(mid + half * x)))
        .sum::<f64>()
        * 0.5
}

/// One subset term without its sign:
/// `[C2 (1 - e^{-l0 g}) - l0 (1 - e^{-C2 g})] / (l0 - C2)`.
///
/// Evaluated as `-l0 C2 g^2 m[l0 g, C2 g]`, which has no cancellation at high
/// SNR. When `C2` is within `1e-9` (relative) of `l0` the analytic limit
/// `l0 g e^{-l0 g} - (1 - e^{-l0 g})` is used.
pub fn subset_term(lambda0: f64, c2: f64, gamma: f64) -> f64 {
    let x0 = lambda0 * gamma;
    if (lambda0 - c2).abs() < LIMIT_BRANCH_REL * lambda0 {
        return -x0 * x0 * m_prime(x0);
    }
    -lambda0 * c2 * gamma * gamma * m_divided_difference(x0, c2 * gamma)
}

/// Same term evaluated literally; loses precision at high SNR and is singular
/// at `C2 = l0`. Kept for cross-checks.
pub fn subset_term_direct(lambda0: f64, c2: f64, gamma: f64) -> f64 {
    (c2 * one_minus_exp_neg(lambda0 * gamma) - lambda0 * one_minus_exp_neg(c2 * gamma)) / (lambda0 - c2)
}

/// CDF of the HRS combined SNR at `gamma`.
///
/// Uses the signed subset sum, except when every relay branch is in its
/// high-SNR regime (`sum_i kappa_i g <= 2`). There the subset terms cancel to
/// many orders of magnitude and the same closed form is summed as a power
/// series instead.
pub fn hrs_cdf(params: &SchemeParams, gamma: f64) -> Result<f64> {
    let n = params.relays();
    if n > MAX_ENUMERATED_RELAYS {
        return Err(Error::TooManyRelays(n));
    }
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    let scaled: Vec<f64> = params.branch_rates().iter().map(|k| k * gamma).collect();
    if scaled.iter().sum::<f64>() <= SERIES_MAX_ARG {
        return Ok(hrs_cdf_series(params.lambdas.lambda0 * gamma, &scaled));
    }
    hrs_cdf_subset_sum(params, gamma)
}

/// The subset-sum form of [`hrs_cdf`] over all `2^n - 1` non-empty subsets.
pub fn hrs_cdf_subset_sum(params: &SchemeParams, gamma: f64) -> Result<f64> {
    let n = params.relays();
    if n > MAX_ENUMERATED_RELAYS {
        return Err(Error::TooManyRelays(n));
    }
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    let rates = params.branch_rates();
    let lambda0 = params.lambdas.lambda0;
    let mut acc = CompensatedSum::new();
    let mut c2 = 0.0;
    let mut members = 0u32;
    let mut prev_gray = 0u64;
    // Gray-code walk: each step toggles exactly one relay
    for k in 1u64..(1u64 << n) {
        let gray = k ^ (k >> 1);
        let flipped = (gray ^ prev_gray).trailing_zeros() as usize;
        if gray & (1 << flipped) != 0 {
            c2 += rates[flipped];
            members += 1;
        } else {
            c2 -= rates[flipped];
            members -= 1;
        }
        prev_gray = gray;
        // (-1)^{|b|}
        let sign = if members.is_multiple_of(2) { 1.0 } else { -1.0 };
        acc.add(sign * subset_term(lambda0, c2, gamma));
    }
    Ok(acc.value())
}

const SERIES_MAX_ARG: f64 = 2.0;
const SERIES_EXTRA_TERMS: usize = 40;

// With a = l0 g and x_i = kappa_i g the CDF is
// a * int_0^1 e^{-a (1 - s)} prod_i (1 - e^{-x_i s}) ds.
// The product is expanded in powers of s (its first n coefficients vanish)
// and integrated term by term.
fn hrs_cdf_series(a: f64, x: &[f64]) -> f64 {
    let n = x.len();
    let deg = n + SERIES_EXTRA_TERMS;
    let mut poly = vec![0.0; deg + 1];
    poly[0] = 1.0;
    let mut factor = vec![0.0; deg + 1];
    for &xi in x {
        let mut t = 1.0;
        for (j, f) in factor.iter_mut().enumerate().skip(1) {
            t *= xi / j as f64;
            *f = if j % 2 == 1 { t } else { -t };
        }
        let mut next = vec![0.0; deg + 1];
        for (i, &pi) in poly.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for j in 1..=deg - i {
                next[i + j] += pi * factor[j];
            }
        }
        poly = next;
    }
    let moments = tilted_moments(a, deg);
    let mut acc = CompensatedSum::new();
    for k in n..=deg {
        acc.add(poly[k] * moments[k]);
    }
    a * acc.value()
}

// I_k = int_0^1 s^k e^{-a (1 - s)} ds for k = 0..=kmax.
fn tilted_moments(a: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if a <= 1.0 {
        // I_k = sum_m (-a)^m k! / (k + m + 1)!
        for (k, slot) in out.iter_mut().enumerate() {
            let mut term = 1.0 / (k as f64 + 1.0);
            let mut acc = 0.0;
            for m in 0..SERIES_EXTRA_TERMS {
                acc += term;
                term *= -a / (k + m + 2) as f64;
            }
            *slot = acc;
        }
        return out;
    }
    // forward recurrence I_k = (1 - k I_{k-1}) / a is stable for k <= a,
    // the backward one I_{k-1} = (1 - a I_k) / k for k > a
    let split = (a.floor() as usize).min(kmax);
    out[0] = one_minus_exp_neg(a) / a;
    for k in 1..=split {
        out[k] = (1.0 - k as f64 * out[k - 1]) / a;
    }
    if split < kmax {
        let top = 4 * kmax + 64;
        let mut ik = 1.0 / (a + top as f64 + 1.0);
        for k in (split + 2..=top).rev() {
            ik = (1.0 - a * ik) / k as f64;
            if k - 1 <= kmax {
                out[k - 1] = ik;
            }
        }
    }
    out
}

/// FER of HRS: `Pr(gamma_HRS < gamma_td)`.
pub fn hrs_fer_analytical(params: &SchemeParams) -> Result<f64> {
    hrs_cdf(params, params.gamma_td)
}

/// High-SNR CDF of the HRS SNR at `gamma`:
/// `l0 g^{n+1} / (n+1) * prod_i kappa_i`.
pub fn hrs_cdf_asymptotic(params: &SchemeParams, gamma: f64) -> f64 {
    let n = params.relays() as i32;
    let prod: f64 = (0..params.relays()).map(|i| params.branch_rate(i)).product();
    params.lambdas.lambda0 * gamma.powi(n + 1) / (n + 1) as f64 * prod
}

fn asymptotic_prefactor(params: &SchemeParams) -> f64 {
    let n = params.relays() as i32;
    params.gamma_td.powi(n + 1) / (n + 1) as f64 * params.lambdas.lambda0
}

/// High-SNR FER of HRS.
pub fn hrs_fer_asymptotic(params: &SchemeParams) -> f64 {
    let r = params.threshold_ratio();
    let l = &params.lambdas;
    let prod: f64 = l
        .lambda1
        .iter()
        .zip(&l.lambda2)
        .map(|(&l1, &l2)| l2 * (1.0 + r * l1 / l2))
        .product();
    asymptotic_prefactor(params) * prod
}

/// High-SNR FER of relay selection with relays that always decode.
pub fn pdfrs_fer(params: &SchemeParams) -> f64 {
    asymptotic_prefactor(params) * params.lambdas.lambda2.iter().product::<f64>()
}

/// High-SNR FER of AF relay selection, each relay link treated as Rayleigh
/// with rate `lambda1 + lambda2`.
pub fn afrs_fer(params: &SchemeParams) -> f64 {
    let l = &params.lambdas;
    let prod: f64 = l
        .lambda1
        .iter()
        .zip(&l.lambda2)
        .map(|(&l1, &l2)| l2 * (1.0 + l1 / l2))
        .product();
    asymptotic_prefactor(params) * prod
}

/// FER ratio AF-RS / HRS at high SNR.
pub fn hrs_gain_over_afrs(params: &SchemeParams) -> f64 {
    let r = params.threshold_ratio();
    let l = &params.lambdas;
    l.lambda1
        .iter()
        .zip(&l.lambda2)
        .map(|(&l1, &l2)| (1.0 + l1 / l2) / (1.0 + r * l1 / l2))
        .product()
}

/// Approximate CDF of the end-to-end SNR through relay `i`.
pub fn relay_branch_cdf(params: &SchemeParams, i: usize, gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let l1 = params.lambdas.lambda1[i];
    let l2 = params.lambdas.lambda2[i];
    if gamma < params.gamma_td {
        one_minus_exp_neg(params.branch_rate(i) * gamma)
    } else {
        one_minus_exp_neg(l1 * params.gamma_t1 + l2 * gamma)
    }
}

/// CDF of the best relay branch below `gamma_td`, product form.
pub fn best_relay_cdf(params: &SchemeParams, gamma: f64) -> f64 {
    (0..params.relays())
        .map(|i| one_minus_exp_neg(params.branch_rate(i) * gamma))
        .product()
}

/// Same CDF expanded over all relay subsets: `sum_b (-1)^{|b|} e^{-C2(b) g}`.
pub fn best_relay_cdf_subset_sum(params: &SchemeParams, gamma: f64) -> Result<f64> {
    let n = params.relays();
    if n > MAX_ENUMERATED_RELAYS {
        return Err(Error::TooManyRelays(n));
    }
    let rates = params.branch_rates();
    let mut acc = CompensatedSum::new();
    for b in 0u64..(1u64 << n) {
        let c2: f64 = (0..n).filter(|&i| b >> i & 1 == 1).map(|i| rates[i]).sum();
        let sign = if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * (-c2 * gamma).exp());
    }
    Ok(acc.value())
}

/// Numerical oracle for [`hrs_cdf`]: convolves the direct-link density with
/// the product-form best-relay CDF by adaptive quadrature.
pub fn oracle_cdf_numeric(params: &SchemeParams, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    let l0 = params.lambdas.lambda0;
    let integrand = |u: f64| l0 * (-l0 * (gamma - u)).exp() * best_relay_cdf(params, u);
    Ok(integrate(integrand, 0.0, gamma, Tolerance::relative(1e-10))?.value)
}

/// Oracle FER at `gamma_td`.
pub fn oracle_fer_numeric(params: &SchemeParams) -> Result<f64> {
    oracle_cdf_numeric(params, params.gamma_td)
}

/// Relay selection scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelayScheme {
    Hrs,
    AfRs,
    PdfRs,
}

impl RelayScheme {
    pub fn label(&self) -> &'static str {
        match self {
            RelayScheme::Hrs => "HRS",
            RelayScheme::AfRs => "AF-RS",
            RelayScheme::PdfRs => "PDF-RS",
        }
    }
}

impl std::fmt::Display for RelayScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Map a scheme onto equivalent HRS parameters: PDF-RS has error-free relays
/// (`lambda1 = 0`) and AF-RS folds both hops into a single Rayleigh link of
/// rate `lambda1 + lambda2`.
pub fn equivalent_hrs_params(scheme: RelayScheme, params: &SchemeParams) -> SchemeParams {
    let mut p = params.clone();
    match scheme {
        RelayScheme::Hrs => {}
        RelayScheme::PdfRs => p.lambdas.lambda1.iter_mut().for_each(|l| *l = 0.0),
        RelayScheme::AfRs => {
            for (l1, l2) in p.lambdas.lambda1.iter_mut().zip(p.lambdas.lambda2.iter_mut()) {
                *l2 += *l1;
                *l1 = 0.0;
            }
        }
    }
    p
}

/// Analytical and asymptotic FER at one average SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FerPoint {
    pub snr_db: f64,
    pub fer_analytical: f64,
    pub fer_asymptotic: f64,
    pub scheme: String,
}

impl FerPoint {
    /// The high-SNR expression is only meaningful while it stays a probability.
    pub fn asymptotic_valid(&self) -> bool {
        self.fer_asymptotic <= 1.0
    }
}

/// Sweep a relay network over average SNR.
pub fn relay_fer_sweep(
    scheme: RelayScheme,
    network: &NetworkConfig,
    gamma_t1: f64,
    gamma_td: f64,
    snr_db: &[f64],
) -> Result<Vec<FerPoint>> {
    snr_db
        .iter()
        .map(|&db| {
            let cfg = network.with_avg_snr(db_to_linear(db))?;
            let params = equivalent_hrs_params(scheme, &SchemeParams::from_network(&cfg, gamma_t1, gamma_td)?);
            Ok(FerPoint {
                snr_db: db,
                fer_analytical: hrs_fer_analytical(&params)?,
                fer_asymptotic: hrs_fer_asymptotic(&params),
                scheme: scheme.label().into(),
            })
        })
        .collect()
}

/// Threshold approximation of the FER of an STBC/MRC link with `n_paths`
/// Rayleigh paths: the combiner-SNR CDF at `gamma_t`.
pub fn mimo_fer_approx(n_t: u32, n_paths: u32, avg_snr: f64, gamma_t: f64) -> f64 {
    crate::channel::mimo_combiner_cdf(gamma_t, n_t, n_paths, avg_snr)
}

/// High-SNR bound `gamma_t^N / ((avg_snr / n_t)^N N!)`.
pub fn mimo_fer_asymptotic(n_t: u32, n_paths: u32, avg_snr: f64, gamma_t: f64) -> f64 {
    let x = gamma_t * n_t as f64 / avg_snr;
    let factorial: f64 = (1..=n_paths).map(|k| k as f64).product();
    x.powi(n_paths as i32) / factorial
}

/// Exact average FER of uncoded BPSK frames over the combiner-SNR
/// distribution, by quadrature.
pub fn mimo_fer_exact_uncoded(n_t: u32, n_paths: u32, avg_snr: f64, frame_len: usize) -> Result<f64> {
    let scale = avg_snr / n_t as f64;
    let n = n_paths as i32;
    let log_norm = -(n as f64) * scale.ln() - (1..n_paths).map(|k| (k as f64).ln()).sum::<f64>();
    let pdf = |g: f64| {
        if g <= 0.0 {
            return if n == 1 { 1.0 / scale } else { 0.0 };
        }
        (log_norm + (n - 1) as f64 * g.ln() - g / scale).exp()
    };
    let integrand = |g: f64| uncoded_awgn_fer(g, frame_len, 2.0) * pdf(g);
    // the AWGN FER is negligible beyond ~40 (Q(sqrt 80) ~ 1e-19)
    let split = [0.0, 1.0, 4.0, 10.0, 40.0];
    let mut total = 0.0;
    for w in split.windows(2) {
        total += integrate(integrand, w[0], w[1], Tolerance::relative(1e-10).with_abs(1e-300))?.value;
    }
    Ok(total)
}

/// Write FER points as `snr_db,fer_analytical,fer_asymptotic,scheme`.
pub fn write_fer_points<W: Write>(points: &[FerPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NetworkConfig;

    fn params(n: usize, omega1: f64, snr_db: f64, gt1: f64, gtd: f64) -> SchemeParams {
        let cfg = NetworkConfig::symmetric(n, 1.0, omega1, 1.0, db_to_linear(snr_db)).unwrap();
        SchemeParams::from_network(&cfg, gt1, gtd).unwrap()
    }

    #[test]
    fn m_series_and_direct_agree_at_switch() {
        for x in [0.49999, 0.5, 0.50001] {
            let direct = 1.0 + f64::exp_m1(-x) / x;
            assert!((m_fn(x) - direct).abs() < 1e-14);
            let direct_p = (1.0 - (-x).exp() * (1.0 + x)) / (x * x);
            assert!((m_prime(x) - direct_p).abs() < 1e-13);
        }
    }

    #[test]
    fn stable_term_matches_direct_formula() {
        for (l0, c2, g) in [(0.1, 0.3, 3.4), (0.5, 0.05, 2.0), (1.0, 2.5, 4.0), (0.01, 0.02, 3.0)] {
            let a = subset_term(l0, c2, g);
            let b = subset_term_direct(l0, c2, g);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn limit_branch_continuity() {
        let (l0, g) = (0.2f64, 3.0f64);
        let x = l0 * g;
        let limit = x * (-x).exp() - one_minus_exp_neg(x);
        assert!((subset_term(l0, l0, g) - limit).abs() < 1e-15);
        for rel in [1e-4, 1e-6] {
            let near = subset_term(l0, l0 * (1.0 + rel), g);
            assert!((near - limit).abs() / limit.abs() < 10.0 * rel);
            // the literal formula at the same offset, away from its cancellation
            let direct = subset_term_direct(l0, l0 * (1.0 + rel), g);
            assert!((near - direct).abs() / limit.abs() < 1e-5);
        }
    }

    #[test]
    fn tilted_moments_match_quadrature() {
        for a in [0.3, 1.0, 1.7, 5.0, 37.5, 400.0] {
            let m = tilted_moments(a, 64);
            for k in [0usize, 1, 3, 10, 40, 64] {
                let q = integrate(
                    |s| s.powi(k as i32) * (-a * (1.0 - s)).exp(),
                    0.0,
                    1.0,
                    Tolerance::relative(1e-13),
                )
                .unwrap()
                .value;
                assert!((m[k] - q).abs() <= 1e-11 * q, "a={a} k={k}: {} vs {q}", m[k]);
            }
        }
    }

    #[test]
    fn series_and_subset_sum_agree_where_both_hold() {
        for (n, snr) in [(1, 8.0), (2, 12.0), (3, 14.0), (4, 16.0)] {
            let p = params(n, 1.0, snr, 3.2, 3.6);
            let scaled: Vec<f64> = p.branch_rates().iter().map(|k| k * p.gamma_td).collect();
            assert!(scaled.iter().sum::<f64>() <= SERIES_MAX_ARG);
            let series = hrs_cdf(&p, p.gamma_td).unwrap();
            let subset = hrs_cdf_subset_sum(&p, p.gamma_td).unwrap();
            assert!((series - subset).abs() <= 1e-8 * series, "n={n}: {series} vs {subset}");
        }
    }

    #[test]
    fn high_snr_cdf_matches_oracle() {
        for n in [2, 4, 8] {
            for snr in [30.0, 45.0, 60.0] {
                let p = params(n, 1.0, snr, 3.2, 3.6);
                let a = hrs_fer_analytical(&p).unwrap();
                let o = oracle_fer_numeric(&p).unwrap();
                assert!((a - o).abs() <= 1e-8 * o, "n={n} snr={snr}: {a} vs {o}");
            }
        }
    }

    #[test]
    fn cdf_at_zero_is_zero() {
        let p = params(2, 1.0, 10.0, 3.2, 3.6);
        assert_eq!(hrs_cdf(&p, 0.0).unwrap(), 0.0);
        assert_eq!(oracle_cdf_numeric(&p, 0.0).unwrap(), 0.0);
        assert_eq!(relay_branch_cdf(&p, 0, 0.0), 0.0);
    }

    #[test]
    fn single_relay_against_oracle() {
        let lambdas = Lambdas {
            lambda0: 0.01,
            lambda1: vec![0.01],
            lambda2: vec![0.01],
        };
        let p = SchemeParams::new(lambdas, 3.436, 3.436).unwrap();
        let a = hrs_fer_analytical(&p).unwrap();
        let o = oracle_fer_numeric(&p).unwrap();
        assert!((a - o).abs() / o < 1e-6);
    }

    #[test]
    fn subset_identity_holds() {
        let p = params(6, 0.7, 3.0, 3.0, 4.0);
        for g in [0.1, 1.0, 3.9] {
            let prod = best_relay_cdf(&p, g);
            let sum = best_relay_cdf_subset_sum(&p, g).unwrap();
            assert!((prod - sum).abs() <= 1e-12 * prod.max(1e-300) + 1e-15);
        }
        // sum over all subsets of the sign vanishes
        assert!(best_relay_cdf_subset_sum(&p, 0.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn single_relay_cdf_is_branch_cdf() {
        let p = params(1, 2.0, 5.0, 3.0, 3.5);
        for g in [0.5, 1.7, 3.4] {
            assert!((best_relay_cdf(&p, g) - relay_branch_cdf(&p, 0, g)).abs() < 1e-15);
        }
    }

    #[test]
    fn relay_branch_continuous_at_threshold() {
        let p = params(1, 1.0, 10.0, 3.24, 3.43);
        let g = p.gamma_td;
        let below = one_minus_exp_neg(p.branch_rate(0) * g);
        assert!((below - relay_branch_cdf(&p, 0, g)).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_identities() {
        let p = params(3, 0.5, 20.0, 3.2, 3.9);
        let eq16 = hrs_cdf_asymptotic(&p, p.gamma_td);
        assert!((eq16 - hrs_fer_asymptotic(&p)).abs() / eq16 < 1e-13);
        let mut p0 = p.clone();
        p0.gamma_t1 = 1e-300;
        assert!((hrs_fer_asymptotic(&p0) - pdfrs_fer(&p)).abs() / pdfrs_fer(&p) < 1e-12);
        let mut pe = p.clone();
        pe.gamma_t1 = pe.gamma_td;
        assert!((hrs_fer_asymptotic(&pe) - afrs_fer(&p)).abs() / afrs_fer(&p) < 1e-13);
        assert!((hrs_gain_over_afrs(&pe) - 1.0).abs() < 1e-15);
        let mut doubled = p.clone();
        doubled.lambdas.lambda0 *= 2.0;
        assert!((hrs_cdf_asymptotic(&doubled, 2.0) / hrs_cdf_asymptotic(&p, 2.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_relay_asymptotic_instantiation() {
        let (gt1, gt2) = (3.236, 3.433);
        let p = params(1, 1.0, 20.0, gt1, gt2);
        let l = p.lambdas.lambda0;
        let expected = gt2 * gt2 / 2.0 * l * l * (1.0 + gt1 / gt2);
        assert!((hrs_fer_asymptotic(&p) - expected).abs() / expected < 1e-14);
    }

    #[test]
    fn asymptotic_scales_with_snr() {
        let a = hrs_fer_asymptotic(&params(2, 1.0, 20.0, 3.2, 3.6));
        let b = hrs_fer_asymptotic(&params(2, 1.0, 30.0, 3.2, 3.6));
        assert!((a / b - 1e3).abs() / 1e3 < 1e-12);
    }

    #[test]
    fn equivalent_schemes_match_closed_forms() {
        let p = params(2, 0.25, 25.0, 3.2, 3.6);
        let pdf = equivalent_hrs_params(RelayScheme::PdfRs, &p);
        assert!((hrs_fer_asymptotic(&pdf) - pdfrs_fer(&p)).abs() / pdfrs_fer(&p) < 1e-13);
        let af = equivalent_hrs_params(RelayScheme::AfRs, &p);
        assert!((hrs_fer_asymptotic(&af) - afrs_fer(&p)).abs() / afrs_fer(&p) < 1e-13);
    }

    #[test]
    fn too_many_relays_rejected() {
        let p = params(25, 1.0, 10.0, 3.0, 4.0);
        assert!(matches!(hrs_cdf(&p, 1.0), Err(Error::TooManyRelays(25))));
    }

    #[test]
    fn invalid_params_rejected() {
        let l = Lambdas {
            lambda0: 0.1,
            lambda1: vec![0.1],
            lambda2: vec![0.1],
        };
        assert!(SchemeParams::new(l.clone(), 4.0, 3.0).is_err());
        assert!(SchemeParams::new(l.clone(), 0.0, 3.0).is_err());
        let bad = Lambdas { lambda2: vec![], ..l };
        assert!(SchemeParams::new(bad, 1.0, 3.0).is_err());
    }

    #[test]
    fn mimo_approximations() {
        // N = 1: Rayleigh CDF
        let v = mimo_fer_approx(1, 1, 100.0, 0.25);
        assert!((v - one_minus_exp_neg(0.0025)).abs() < 1e-15);
        let exact = mimo_fer_exact_uncoded(1, 1, 1000.0, 1).unwrap();
        // BPSK over Rayleigh: (1 - sqrt(g/(1+g))) / 2
        let closed = 0.5 * (1.0 - (1000.0f64 / 1001.0).sqrt());
        assert!((exact - closed).abs() / closed < 1e-8);
        assert!(mimo_fer_asymptotic(1, 2, 100.0, 3.4) > mimo_fer_approx(1, 2, 100.0, 3.4));
    }

    #[test]
    fn fer_points_csv_header() {
        let net = NetworkConfig::symmetric(1, 1.0, 1.0, 1.0, 1.0).unwrap();
        let pts = relay_fer_sweep(RelayScheme::Hrs, &net, 3.2, 3.4, &[0.0, 10.0]).unwrap();
        let mut buf = Vec::new();
        write_fer_points(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("snr_db,fer_analytical,fer_asymptotic,scheme\n0.0,"));
        assert!(text.trim_end().ends_with(",HRS"));
    }
}
