//! BPSK over AWGN with LLR demodulation.
//!
//! Randomness is counter-based: every (seed, domain, frame) triple maps to
//! its own ChaCha8 stream, so a frame's noise does not depend on which
//! worker draws it or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("noise standard deviation must be positive, got {0}")]
    BadSigma(f64),
    #[error("effective rate must lie in (0, 1], got {0}")]
    BadRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub ebn0_db: f64,
    pub effective_rate: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(ebn0_db: f64, effective_rate: f64, seed: u64) -> Result<Self, ChannelError> {
        if !(effective_rate > 0.0 && effective_rate <= 1.0) {
            return Err(ChannelError::BadRate(effective_rate));
        }
        Ok(Self {
            ebn0_db,
            effective_rate,
            sigma: sigma_from_ebn0(ebn0_db, effective_rate),
            seed,
        })
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// `sigma^2 = 1 / (2 R 10^(Eb/N0 / 10))`.
pub fn sigma_from_ebn0(ebn0_db: f64, effective_rate: f64) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    (1.0 / (2.0 * effective_rate * ebn0)).sqrt()
}

/// Bit 0 maps to +1, bit 1 to -1.
pub fn modulate(codeword: &[u8]) -> Vec<f64> {
    codeword
        .iter()
        .map(|&c| if c & 1 == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Hard decision; `y >= 0` decides bit 0.
pub fn hard_decision(y: f64) -> u8 {
    u8::from(y < 0.0)
}

pub fn transmit<R: Rng + ?Sized>(symbols: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    symbols
        .iter()
        .map(|&x| {
            let z: f64 = rng.sample(StandardNormal);
            x + sigma * z
        })
        .collect()
}

/// `l = 2 y / sigma^2`; positive favours bit 0.
pub fn demodulate_llr(y: &[f64], sigma: f64) -> Result<Vec<f64>, ChannelError> {
    if !(sigma > 0.0) {
        return Err(ChannelError::BadSigma(sigma));
    }
    let scale = 2.0 / (sigma * sigma);
    Ok(y.iter().map(|&v| scale * v).collect())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for `(seed, domain, counter)`.
pub fn stream_rng(seed: u64, domain: u64, counter: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(domain.wrapping_add(0x5eed)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(counter);
    rng
}

/// Domain tag for a point on an Eb/N0 grid, stable across runs.
pub fn ebn0_domain(ebn0_db: f64) -> u64 {
    (ebn0_db * 1000.0).round() as i64 as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn bpsk_map() {
        assert_eq!(modulate(&[0, 1, 1, 0]), vec![1.0, -1.0, -1.0, 1.0]);
        assert!(modulate(&[0; 8]).iter().all(|&x| x == 1.0));
        let bits = [1, 0, 0, 1, 1];
        let back: Vec<u8> = modulate(&bits).into_iter().map(hard_decision).collect();
        assert_eq!(back, bits);
    }

    #[test]
    fn llr_scaling() {
        assert_eq!(demodulate_llr(&[1.0, 0.0], 1.0).unwrap(), vec![2.0, 0.0]);
        assert_eq!(demodulate_llr(&[1.0], 0.0), Err(ChannelError::BadSigma(0.0)));
        assert!(demodulate_llr(&[1.0], -1.0).is_err());
        let y = [0.3, -1.7, 2.2];
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let a = demodulate_llr(&y, 0.8).unwrap();
        let b = demodulate_llr(&neg, 0.8).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| *p == -*q));
    }

    #[test]
    fn sigma_relation() {
        let cfg = ChannelConfig::new(2.0, 0.5, 1).unwrap();
        let expect = 1.0 / (2.0 * 0.5 * 10f64.powf(0.2));
        assert!((cfg.variance() - expect).abs() < 1e-15);
        assert!(ChannelConfig::new(2.0, 0.0, 1).is_err());
    }

    #[test]
    fn noiseless_limit() {
        let x = modulate(&[0, 1, 0]);
        let mut rng = stream_rng(3, 0, 0);
        assert_eq!(transmit(&x, 0.0, &mut rng), x);
    }

    #[test]
    fn noise_moments() {
        let sigma = 0.7;
        let n = 1_000_000;
        let x = vec![1.0; n];
        let y = transmit(&x, sigma, &mut stream_rng(11, 1, 0));
        let mean = y.iter().map(|v| v - 1.0).sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - 1.0 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 * sigma / 1000.0, "mean {mean}");
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn sign_error_rate_matches_gaussian_tail() {
        let sigma = 0.8;
        let n = 400_000;
        let y = transmit(&vec![1.0; n], sigma, &mut stream_rng(5, 2, 9));
        let llr = demodulate_llr(&y, sigma).unwrap();
        let errors = llr.iter().filter(|&&l| l < 0.0).count() as f64;
        let q = 1.0 - Normal::standard().cdf(1.0 / sigma);
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((errors / n as f64 - q).abs() < 4.0 * se);
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| stream_rng(1, 2, 3).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let b: u64 = stream_rng(1, 2, 4).random();
        assert_ne!(a[0], b);
    }
}
