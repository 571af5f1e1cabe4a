//! Kolmogorov-Smirnov checks of the channel samplers against their CDFs.

use hrsfer::analysis::{relay_branch_cdf, SchemeParams};
use hrsfer::channel::{
    af_effective_snr, mimo_combiner_cdf, sample_mimo_combiner_snr, sample_realization, NetworkConfig,
};
use hrsfer::montecarlo::block_stream;
use hrsfer::special::db_to_linear;

const DRAWS: usize = 100_000;

/// Asymptotic critical value of the one-sample KS statistic at alpha = 0.01.
fn ks_critical(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

fn ks_distance(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

fn exponential_cdf(mean: f64) -> impl Fn(f64) -> f64 {
    move |x| -(-x / mean).exp_m1()
}

fn network() -> NetworkConfig {
    NetworkConfig::new(1.0, vec![16.0, 0.5], vec![2.0, 1.0 / 16.0], db_to_linear(7.0)).unwrap()
}

#[test]
fn hop_snrs_are_exponential() {
    let cfg = network();
    let mut rng = block_stream(11, 0, 0);
    let draws: Vec<_> = (0..DRAWS).map(|_| sample_realization(&cfg, &mut rng)).collect();
    let snr = cfg.avg_snr();
    let mut columns = vec![(draws.iter().map(|r| r.gamma0).collect::<Vec<_>>(), cfg.omega0())];
    for i in 0..cfg.relays() {
        columns.push((draws.iter().map(|r| r.gamma1[i]).collect(), cfg.omega1()[i]));
        columns.push((draws.iter().map(|r| r.gamma2[i]).collect(), cfg.omega2()[i]));
    }
    for (k, (samples, omega)) in columns.into_iter().enumerate() {
        let d = ks_distance(samples, exponential_cdf(snr * omega));
        assert!(d < ks_critical(DRAWS), "column {k}: KS distance {d}");
    }
}

#[test]
fn combiner_snr_is_gamma() {
    for (n_t, n_paths, db) in [(1, 1, 10.0), (1, 4, 10.0), (2, 4, 20.0)] {
        let avg = db_to_linear(db);
        let mut rng = block_stream(12, n_paths, n_t);
        let samples: Vec<f64> = (0..DRAWS)
            .map(|_| sample_mimo_combiner_snr(n_t, n_paths, avg, &mut rng))
            .collect();
        let d = ks_distance(samples, |g| mimo_combiner_cdf(g, n_t, n_paths, avg));
        assert!(d < ks_critical(DRAWS), "n_t={n_t} paths={n_paths}: KS distance {d}");
    }
}

#[test]
fn ks_statistic_rejects_a_wrong_mean() {
    let mut rng = block_stream(13, 0, 0);
    let samples: Vec<f64> = (0..DRAWS)
        .map(|_| sample_mimo_combiner_snr(1, 1, 10.0, &mut rng))
        .collect();
    assert!(ks_distance(samples, exponential_cdf(10.5)) > ks_critical(DRAWS));
}

/// The relay-branch CDF used by the analysis is an approximation, so its
/// distance to the sampled branch SNR is reported rather than asserted.
#[test]
fn relay_branch_approximation_distance() {
    let cfg = NetworkConfig::symmetric(1, 1.0, 1.0, 1.0, db_to_linear(10.0)).unwrap();
    let params = SchemeParams::from_network(&cfg, 3.2, 3.6).unwrap();
    let mut rng = block_stream(14, 0, 0);
    let samples: Vec<f64> = (0..DRAWS)
        .map(|_| {
            let r = sample_realization(&cfg, &mut rng);
            let (g1, g2) = (r.gamma1[0], r.gamma2[0]);
            if g1 >= params.gamma_t1 {
                g2
            } else {
                af_effective_snr(g1, g2)
            }
        })
        .collect();
    let d = ks_distance(samples, |g| relay_branch_cdf(&params, 0, g));
    eprintln!("relay branch KS distance {d:.4} (critical {:.4})", ks_critical(DRAWS));
    assert!((0.0..1.0).contains(&d));
}
