//! Multi-attempt decoding: random perturbation (RPE), perturbation with an
//! adaptive bias (PE) and bias only (BE).

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{demodulate_llr, hard_decision, ChannelError};
use crate::cost::{CostEvent, OpCounter};
use crate::scl::{AttemptTrace, DecodeError, FrameDecoder, PathOutcome};

#[derive(Debug, Error, PartialEq)]
pub enum EnhanceError {
    #[error("attempt {attempt} outside 2..={max}")]
    BadAttempt { attempt: usize, max: usize },
    #[error("at least one attempt is required")]
    NoAttempts,
    #[error("perturbation power must be finite and non-negative, got {0}")]
    BadSigma(f64),
    #[error("no codewords to classify")]
    NoCodewords,
    #[error("codeword length {got} does not match received length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Gaussian noise on every position.
    Rpe,
    /// Bias on unanimous positions, noise elsewhere.
    Pe,
    /// Bias on unanimous positions only.
    Be,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhanceConfig {
    pub scheme: Scheme,
    pub max_attempts: usize,
    pub sigma_p: f64,
}

impl EnhanceConfig {
    pub fn new(scheme: Scheme, max_attempts: usize, sigma_p: f64) -> Result<Self, EnhanceError> {
        if max_attempts == 0 {
            return Err(EnhanceError::NoAttempts);
        }
        if !(sigma_p.is_finite() && sigma_p >= 0.0) {
            return Err(EnhanceError::BadSigma(sigma_p));
        }
        Ok(Self {
            scheme,
            max_attempts,
            sigma_p,
        })
    }

    /// Bias strength `sigma_p / sqrt(2)`.
    pub fn lambda(&self) -> f64 {
        self.sigma_p / std::f64::consts::SQRT_2
    }
}

/// Perturbation power by code rate: 0.25 at rate 1/4, 0.10 otherwise.
pub fn default_sigma_p(rate: f64) -> f64 {
    if (rate - 0.25).abs() < 1e-9 {
        0.25
    } else {
        0.10
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agreement {
    AllAgreed,
    AllDisagreed,
    PartiallyAgreed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementMap {
    pub labels: Vec<Agreement>,
}

impl AgreementMap {
    pub fn count(&self, label: Agreement) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Label each position by how the candidate codewords relate to the hard
/// decision of `y`.
pub fn classify_agreement(y: &[f64], codewords: &[&[u8]]) -> Result<AgreementMap, EnhanceError> {
    let first = codewords.first().ok_or(EnhanceError::NoCodewords)?;
    if let Some(bad) = codewords.iter().find(|c| c.len() != y.len()) {
        return Err(EnhanceError::LengthMismatch {
            expected: y.len(),
            got: bad.len(),
        });
    }
    let labels = y
        .iter()
        .enumerate()
        .map(|(i, &yi)| {
            let bit = first[i];
            if codewords.iter().any(|c| c[i] != bit) {
                Agreement::PartiallyAgreed
            } else if bit == hard_decision(yi) {
                Agreement::AllAgreed
            } else {
                Agreement::AllDisagreed
            }
        })
        .collect();
    Ok(AgreementMap { labels })
}

/// Perturbation added to the received symbols before attempt `attempt`.
/// `c_hat` supplies the unanimous bit at agreed and disagreed positions.
#[allow(clippy::too_many_arguments)]
pub fn make_perturbation<R: Rng + ?Sized>(
    scheme: Scheme,
    attempt: usize,
    max_attempts: usize,
    map: &AgreementMap,
    c_hat: &[u8],
    lambda: f64,
    sigma_p: f64,
    rng: &mut R,
) -> Result<Vec<f64>, EnhanceError> {
    if attempt < 2 || attempt > max_attempts {
        return Err(EnhanceError::BadAttempt {
            attempt,
            max: max_attempts,
        });
    }
    if c_hat.len() != map.labels.len() {
        return Err(EnhanceError::LengthMismatch {
            expected: map.labels.len(),
            got: c_hat.len(),
        });
    }
    let noise = Normal::new(0.0, sigma_p).map_err(|_| EnhanceError::BadSigma(sigma_p))?;
    let last = attempt == max_attempts;
    let out = map
        .labels
        .iter()
        .zip(c_hat)
        .map(|(&label, &c)| {
            let biased = match label {
                Agreement::AllDisagreed => scheme != Scheme::Rpe,
                Agreement::AllAgreed => scheme != Scheme::Rpe && last,
                Agreement::PartiallyAgreed => false,
            };
            if biased {
                if c & 1 == 0 {
                    lambda
                } else {
                    -lambda
                }
            } else if scheme == Scheme::Be {
                0.0
            } else {
                noise.sample(rng)
            }
        })
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhancedOutcome {
    pub result: PathOutcome,
    pub crc_pass: bool,
    pub attempts: usize,
    pub traces: Vec<AttemptTrace>,
    pub ops: OpCounter,
    /// Sum over attempts of the list size used.
    pub list_sum: usize,
}

/// Decode `y`, re-attempting with perturbed symbols while the CRC fails.
/// `second` decodes attempts after the first; `None` reuses `first`.
pub fn enhanced_decode<R: Rng + ?Sized>(
    y: &[f64],
    sigma: f64,
    config: &EnhanceConfig,
    first: &mut dyn FrameDecoder,
    mut second: Option<&mut dyn FrameDecoder>,
    rng: &mut R,
) -> Result<EnhancedOutcome, EnhanceError> {
    let llrs = demodulate_llr(y, sigma)?;
    let mut ops = OpCounter::default();
    let mut list_sum = first.list_size();
    let trace = first.decode_frame(&llrs)?;
    ops += trace.ops;
    let mut traces = vec![trace];
    let lambda = config.lambda();
    let n = y.len();
    for attempt in 2..=config.max_attempts {
        let prev = traces.last().expect("at least one attempt");
        if prev.crc_pass() {
            break;
        }
        let words: Vec<&[u8]> = prev.paths.iter().map(|p| p.codeword.as_slice()).collect();
        let map = classify_agreement(y, &words)?;
        let p = make_perturbation(
            config.scheme,
            attempt,
            config.max_attempts,
            &map,
            words[0],
            lambda,
            config.sigma_p,
            rng,
        )?;
        ops.charge(CostEvent::Bias { n });
        let perturbed: Vec<f64> = y.iter().zip(&p).map(|(a, b)| a + b).collect();
        let llrs = demodulate_llr(&perturbed, sigma)?;
        let dec: &mut dyn FrameDecoder = match second.as_deref_mut() {
            Some(d) => d,
            None => &mut *first,
        };
        list_sum += dec.list_size();
        let trace = dec.decode_frame(&llrs)?;
        ops += trace.ops;
        traces.push(trace);
    }
    let last = traces.last().expect("at least one attempt");
    Ok(EnhancedOutcome {
        result: last.selected().clone(),
        crc_pass: last.crc_pass(),
        attempts: traces.len(),
        ops,
        list_sum,
        traces,
    })
}
