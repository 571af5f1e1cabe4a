//! Block-Rayleigh links of the two-hop relay network.
//!
//! All SNRs are linear power ratios. Link SNRs are exponential with mean
//! `avg_snr * omega`, so they are sampled directly in the SNR domain.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relay network with per-link average channel gains and a common `E/N0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    omega0: f64,
    omega1: Vec<f64>,
    omega2: Vec<f64>,
    avg_snr: f64,
}

impl NetworkConfig {
    pub fn new(omega0: f64, omega1: Vec<f64>, omega2: Vec<f64>, avg_snr: f64) -> Result<Self> {
        if omega1.is_empty() {
            return Err(Error::InvalidConfig("at least one relay is required".into()));
        }
        if omega1.len() != omega2.len() {
            return Err(Error::InvalidConfig(format!(
                "{} source-relay gains but {} relay-destination gains",
                omega1.len(),
                omega2.len()
            )));
        }
        let positive = |x: &f64| x.is_finite() && *x > 0.0;
        if !positive(&omega0) || !omega1.iter().all(positive) || !omega2.iter().all(positive) {
            return Err(Error::InvalidConfig("channel gains must be finite and positive".into()));
        }
        if !positive(&avg_snr) {
            return Err(Error::InvalidConfig("average SNR must be finite and positive".into()));
        }
        Ok(Self {
            omega0,
            omega1,
            omega2,
            avg_snr,
        })
    }

    /// `n` relays, every link with the same gains `(omega0, omega1, omega2)`.
    pub fn symmetric(n: usize, omega0: f64, omega1: f64, omega2: f64, avg_snr: f64) -> Result<Self> {
        Self::new(omega0, vec![omega1; n], vec![omega2; n], avg_snr)
    }

    pub fn relays(&self) -> usize {
        self.omega1.len()
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omega1(&self) -> &[f64] {
        &self.omega1
    }

    pub fn omega2(&self) -> &[f64] {
        &self.omega2
    }

    pub fn avg_snr(&self) -> f64 {
        self.avg_snr
    }

    /// Same gains at a different average SNR.
    pub fn with_avg_snr(&self, avg_snr: f64) -> Result<Self> {
        Self::new(self.omega0, self.omega1.clone(), self.omega2.clone(), avg_snr)
    }
}

/// Exponential rate parameters `lambda = 1 / (avg_snr * omega)` of each link.
#[derive(Debug, Clone, PartialEq)]
pub struct Lambdas {
    pub lambda0: f64,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
}

impl Lambdas {
    pub fn relays(&self) -> usize {
        self.lambda1.len()
    }

    /// Every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Lambdas {
        Lambdas {
            lambda0: self.lambda0 * factor,
            lambda1: self.lambda1.iter().map(|l| l * factor).collect(),
            lambda2: self.lambda2.iter().map(|l| l * factor).collect(),
        }
    }
}

pub fn lambda_params(cfg: &NetworkConfig) -> Lambdas {
    let rate = |omega: f64| 1.0 / (cfg.avg_snr * omega);
    Lambdas {
        lambda0: rate(cfg.omega0),
        lambda1: cfg.omega1.iter().map(|&o| rate(o)).collect(),
        lambda2: cfg.omega2.iter().map(|&o| rate(o)).collect(),
    }
}

/// Instantaneous SNRs of one fading block.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingRealization {
    pub gamma0: f64,
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
}

pub fn sample_realization<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> FadingRealization {
    let mut draw = |omega: f64| -> f64 {
        let e: f64 = Exp1.sample(rng);
        e * cfg.avg_snr * omega
    };
    let gamma0 = draw(cfg.omega0);
    let mut gamma1 = Vec::with_capacity(cfg.relays());
    let mut gamma2 = Vec::with_capacity(cfg.relays());
    for (&o1, &o2) in cfg.omega1.iter().zip(&cfg.omega2) {
        gamma1.push(draw(o1));
        gamma2.push(draw(o2));
    }
    FadingRealization { gamma0, gamma1, gamma2 }
}

/// End-to-end SNR of an amplify-and-forward hop pair.
pub fn af_effective_snr(gamma1: f64, gamma2: f64) -> f64 {
    let denom = gamma1 + gamma2 + 1.0;
    if gamma1 == 0.0 || gamma2 == 0.0 {
        return 0.0;
    }
    if denom.is_infinite() {
        // one hop noiseless: the other hop alone limits the link
        return gamma1.min(gamma2);
    }
    gamma1 * gamma2 / denom
}

/// Upper bound `min(gamma1, gamma2)` of the AF end-to-end SNR.
pub fn af_min_approx(gamma1: f64, gamma2: f64) -> f64 {
    gamma1.min(gamma2)
}

/// Combiner output SNR of an `n_t`-transmit STBC system with `n_paths`
/// independent Rayleigh paths: Gamma with shape `n_paths` and scale
/// `avg_snr / n_t`, drawn as a sum of exponentials.
pub fn sample_mimo_combiner_snr<R: Rng + ?Sized>(n_t: u32, n_paths: u32, avg_snr: f64, rng: &mut R) -> f64 {
    let scale = avg_snr / n_t as f64;
    let mut sum = 0.0;
    for _ in 0..n_paths {
        let e: f64 = Exp1.sample(rng);
        sum += e;
    }
    sum * scale
}

/// CDF of the combiner SNR: regularized lower incomplete gamma.
pub fn mimo_combiner_cdf(gamma: f64, n_t: u32, n_paths: u32, avg_snr: f64) -> f64 {
    crate::special::gamma_p(n_paths as f64, gamma * n_t as f64 / avg_snr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::block_stream;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    #[test]
    fn lambda_examples() {
        let cfg = NetworkConfig::new(1.0, vec![16.0], vec![1.0 / 16.0], 100.0).unwrap();
        let l = lambda_params(&cfg);
        assert!((l.lambda0 - 0.01).abs() < 1e-15);
        assert!((l.lambda1[0] - 1.0 / 1600.0).abs() < 1e-18);
        assert!((l.lambda2[0] - 0.16).abs() < 1e-15);
        let unit = NetworkConfig::symmetric(1, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(lambda_params(&unit).lambda0, 1.0);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(NetworkConfig::new(1.0, vec![], vec![], 1.0).is_err());
        assert!(NetworkConfig::new(1.0, vec![1.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(NetworkConfig::new(0.0, vec![1.0], vec![1.0], 1.0).is_err());
        assert!(NetworkConfig::new(1.0, vec![-1.0], vec![1.0], 1.0).is_err());
        assert!(NetworkConfig::new(1.0, vec![1.0], vec![1.0], f64::NAN).is_err());
    }

    #[test]
    fn af_examples() {
        assert_eq!(af_effective_snr(0.0, 7.0), 0.0);
        assert!((af_effective_snr(1.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((af_effective_snr(1e9, 5.0) - 5.0).abs() / 5.0 < 1e-6);
        assert_eq!(af_min_approx(1.0, 1.0), 1.0);
        assert_eq!(af_min_approx(3.0, 7.0), 3.0);
    }

    #[test]
    fn min_approx_relative_gap() {
        // min / exact - 1 = (min + 1) / max, so the bound tightens when one hop
        // dominates the other
        let mut rng = block_stream(11, 0, 0);
        for _ in 0..10_000 {
            let a = 100.0 + rng.random::<f64>() * 1e4;
            let b = 100.0 + rng.random::<f64>() * 1e4;
            let exact = af_effective_snr(a, b);
            let gap = af_min_approx(a, b) / exact - 1.0;
            let predicted = (a.min(b) + 1.0) / a.max(b);
            assert!((gap - predicted).abs() < 1e-12 * predicted.max(1.0), "gap {gap}");
        }
    }

    #[test]
    fn realization_deterministic_per_seed() {
        let cfg = NetworkConfig::symmetric(3, 1.0, 2.0, 0.5, 10.0).unwrap();
        let a = sample_realization(&cfg, &mut block_stream(5, 0, 0));
        let b = sample_realization(&cfg, &mut block_stream(5, 0, 0));
        assert_eq!(a, b);
        assert_eq!(a.gamma1.len(), 3);
    }

    #[test]
    fn direct_link_sample_mean() {
        let cfg = NetworkConfig::symmetric(1, 1.0, 1.0, 1.0, 10.0).unwrap();
        let mut rng = block_stream(3, 0, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_realization(&cfg, &mut rng).gamma0).sum::<f64>() / n as f64;
        // exponential: sigma of the mean is 10 / sqrt(n)
        assert!((mean - 10.0).abs() < 3.0 * 10.0 / (n as f64).sqrt());
    }

    #[test]
    fn mimo_mean_matches_gamma_mean() {
        let mut rng = block_stream(4, 0, 0);
        let n = 200_000;
        let mean = (0..n)
            .map(|_| sample_mimo_combiner_snr(1, 2, 10.0, &mut rng))
            .sum::<f64>()
            / n as f64;
        // Gamma(2, 10): variance 200
        assert!((mean - 20.0).abs() < 3.0 * (200.0 / n as f64).sqrt());
    }

    proptest! {
        #[test]
        fn af_symmetric_and_bounded(a in 0.0f64..1e6, b in 0.0f64..1e6) {
            prop_assert_eq!(af_effective_snr(a, b), af_effective_snr(b, a));
            prop_assert!(af_effective_snr(a, b) <= af_min_approx(a, b));
        }

        #[test]
        fn lambda_inverse_consistent(o in 1e-3f64..1e3, snr in 1e-2f64..1e6) {
            let cfg = NetworkConfig::symmetric(1, o, o, o, snr).unwrap();
            let l = lambda_params(&cfg);
            prop_assert!((1.0 / (l.lambda0 * snr) - o).abs() / o < 1e-13);
        }
    }
}
