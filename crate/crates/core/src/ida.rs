//! Input-distribution-aware list size selection.
//!
//! The first attempt uses a small list when few channel LLRs are
//! unreliable, otherwise the large one.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::fixedpoint::{FixedPointFormat, QuantizationProfile};

#[derive(Debug, Error, PartialEq)]
pub enum IdaError {
    #[error("threshold must be positive, got {0}")]
    BadGamma(f64),
    #[error("small list {small} must be below large list {large}")]
    BadLists { small: usize, large: usize },
    #[error("no preset for n={n}, rate={rate}")]
    NoPreset { n: usize, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdaConfig {
    /// An LLR is unreliable when `|l| < gamma`.
    pub gamma: f64,
    /// Small list iff fewer than `phi` LLRs are unreliable.
    pub phi: usize,
    pub small_list: usize,
    pub large_list: usize,
    /// Rounding error of quantized LLRs, already folded into `gamma`.
    pub epsilon_adjust: f64,
}

impl IdaConfig {
    pub fn new(gamma: f64, phi: usize, small_list: usize, large_list: usize) -> Result<Self, IdaError> {
        if !(gamma > 0.0) {
            return Err(IdaError::BadGamma(gamma));
        }
        if small_list >= large_list {
            return Err(IdaError::BadLists {
                small: small_list,
                large: large_list,
            });
        }
        Ok(Self {
            gamma,
            phi,
            small_list,
            large_list,
            epsilon_adjust: 0.0,
        })
    }

    /// Parameters for `n` in {4096, 8192} and rate in {0.25, 0.5, 0.75},
    /// with lists 4 and 8.
    pub fn preset(n: usize, rate: f64, quantized: bool) -> Result<Self, IdaError> {
        let r = [0.25, 0.5, 0.75]
            .iter()
            .position(|&x| (x - rate).abs() < 1e-9)
            .ok_or(IdaError::NoPreset { n, rate })?;
        let row: [(f64, usize); 3] = match (n, quantized) {
            (4096, false) => [(0.50, 713), (0.25, 152), (0.25, 50)],
            (8192, false) => [(0.25, 750), (0.25, 328), (0.25, 112)],
            (4096, true) => [(0.625, 888), (0.375, 229), (0.375, 75)],
            (8192, true) => [(0.375, 1123), (0.375, 492), (0.375, 168)],
            _ => return Err(IdaError::NoPreset { n, rate }),
        };
        let (gamma, phi) = row[r];
        let mut cfg = Self::new(gamma, phi, 4, 8)?;
        if quantized {
            cfg.epsilon_adjust = QuantizationProfile::for_code(n, rate).epsilon();
        }
        Ok(cfg)
    }

    /// Threshold on the quantized grid, `gamma - epsilon`.
    pub fn grid_gamma(&self) -> f64 {
        self.gamma - self.epsilon_adjust
    }
}

pub fn count_unreliable(llrs: &[f64], gamma: f64) -> usize {
    llrs.iter().filter(|l| l.abs() < gamma).count()
}

pub fn select_list_size(llrs: &[f64], config: &IdaConfig) -> usize {
    if count_unreliable(llrs, config.gamma) < config.phi {
        config.small_list
    } else {
        config.large_list
    }
}

/// Count on quantized LLRs: `|q| <= gamma'` on the grid, which equals
/// `|l| < gamma' + epsilon` before rounding.
pub fn count_unreliable_quantized(llrs: &[f64], gamma_q: f64, format: &FixedPointFormat) -> usize {
    llrs.iter()
        .filter(|&&l| format.quantize(l).abs() <= gamma_q)
        .count()
}

/// `gamma' + epsilon`, the threshold used for analysis of a quantized
/// decision at `gamma'`.
pub fn quantized_gamma_adjust(gamma_q: f64, format: &FixedPointFormat) -> f64 {
    gamma_q + format.epsilon()
}

/// `P(|l| <= gamma)` for `l = 2y / sigma^2`, `y ~ N(1, sigma^2)`.
pub fn unreliable_probability(gamma: f64, sigma: f64) -> f64 {
    let t = gamma * sigma * sigma / 2.0;
    let z = Normal::standard();
    // P(-t <= y <= t) via tails for accuracy when t is far below 1.
    (z.cdf((t - 1.0) / sigma) - z.cdf((-t - 1.0) / sigma)).clamp(0.0, 1.0)
}

fn ln_binomial(n: usize, i: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(i as f64 + 1.0) - ln_gamma((n - i) as f64 + 1.0)
}

/// Probability that fewer than `phi` of `n` LLRs are unreliable, summed in
/// the log domain.
pub fn small_list_probability(n: usize, gamma: f64, sigma: f64, phi: usize) -> f64 {
    if phi == 0 {
        return 0.0;
    }
    let p = unreliable_probability(gamma, sigma);
    if p == 0.0 {
        return 1.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let terms: Vec<f64> = (0..phi.min(n + 1))
        .map(|i| ln_binomial(n, i) + i as f64 * ln_p + (n - i) as f64 * ln_q)
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max.exp() * sum).clamp(0.0, 1.0)
}

pub fn expected_average_list(
    delta: f64,
    small_list: usize,
    large_list: usize,
    second_attempt_rate: f64,
    second_list: usize,
) -> f64 {
    delta * small_list as f64 + (1.0 - delta) * large_list as f64 + second_attempt_rate * second_list as f64
}
