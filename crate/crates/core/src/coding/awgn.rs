use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Map bits to BPSK (0 -> +1, 1 -> -1) and add real Gaussian noise of
/// variance `1 / (2 snr)`, so that the per-bit SNR equals `snr`.
///
/// At `snr == 0` the output carries no information and is pure unit-variance
/// noise; at infinite SNR it is the noiseless ±1 sequence.
pub fn bpsk_awgn<R: Rng + ?Sized>(bits: &[u8], snr: f64, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(bits.len());
    bpsk_awgn_into(bits, snr, rng, &mut out);
    out
}

pub fn bpsk_awgn_into<R: Rng + ?Sized>(bits: &[u8], snr: f64, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    if snr <= 0.0 {
        out.extend(bits.iter().map(|_| Distribution::<f64>::sample(&StandardNormal, rng)));
        return;
    }
    let sigma = (0.5 / snr).sqrt();
    out.extend(bits.iter().map(|&b| {
        let x = if b == 0 { 1.0 } else { -1.0 };
        if sigma == 0.0 {
            x
        } else {
            let n: f64 = StandardNormal.sample(rng);
            x + sigma * n
        }
    }));
}

/// Hard decision on BPSK samples.
pub fn slice(received: &[f64]) -> Vec<u8> {
    received.iter().map(|&y| u8::from(y < 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::block_stream;
    use crate::special::q_function;

    #[test]
    fn noiseless_limit() {
        let bits = [0u8, 1, 1, 0];
        let rx = bpsk_awgn(&bits, f64::INFINITY, &mut block_stream(1, 0, 0));
        assert_eq!(rx, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let bits = vec![0u8; 64];
        let a = bpsk_awgn(&bits, 2.0, &mut block_stream(9, 1, 2));
        let b = bpsk_awgn(&bits, 2.0, &mut block_stream(9, 1, 2));
        assert_eq!(a, b);
    }

    #[test]
    fn hard_ber_matches_q() {
        let bits = vec![0u8; 1_000_000];
        for (i, db) in [-2.0f64, 0.0, 2.0, 4.0, 6.0].into_iter().enumerate() {
            let snr = 10f64.powf(db / 10.0);
            let rx = bpsk_awgn(&bits, snr, &mut block_stream(30, i as u32, 0));
            let errors = slice(&rx).iter().filter(|&&b| b == 1).count() as f64;
            let n = bits.len() as f64;
            let p = q_function((2.0 * snr).sqrt());
            let sigma = (p * (1.0 - p) / n).sqrt();
            assert!((errors / n - p).abs() < 3.0 * sigma, "{db} dB: {} vs {p}", errors / n);
        }
    }
}
