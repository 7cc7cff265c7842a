//! Uniform fixed-point formats for the quantized decoder model.
//!
//! Values stay in `f64` but are always exact multiples of the format step,
//! so arithmetic on them is exact as long as results are re-saturated.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FixedPointError {
    #[error("integer bits must be >= 1 (got {0})")]
    NoIntegerBits(u32),
    #[error("format too wide: {0} bits")]
    TooWide(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signedness {
    /// Sign bit counted inside the integer bits.
    SignMagnitude,
    Unsigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointFormat {
    pub integer_bits: u32,
    pub fraction_bits: u32,
    pub signedness: Signedness,
}

impl FixedPointFormat {
    pub fn new(
        integer_bits: u32,
        fraction_bits: u32,
        signedness: Signedness,
    ) -> Result<Self, FixedPointError> {
        if integer_bits == 0 {
            return Err(FixedPointError::NoIntegerBits(integer_bits));
        }
        if integer_bits + fraction_bits > 48 {
            return Err(FixedPointError::TooWide(integer_bits + fraction_bits));
        }
        Ok(Self {
            integer_bits,
            fraction_bits,
            signedness,
        })
    }

    pub const fn signed(integer_bits: u32, fraction_bits: u32) -> Self {
        Self {
            integer_bits,
            fraction_bits,
            signedness: Signedness::SignMagnitude,
        }
    }

    pub const fn unsigned(integer_bits: u32, fraction_bits: u32) -> Self {
        Self {
            integer_bits,
            fraction_bits,
            signedness: Signedness::Unsigned,
        }
    }

    /// Total storage bits `q_i + q_f`.
    pub fn width(&self) -> u32 {
        self.integer_bits + self.fraction_bits
    }

    pub fn step(&self) -> f64 {
        (-(self.fraction_bits as f64)).exp2()
    }

    /// Rounding error bound, half a step.
    pub fn epsilon(&self) -> f64 {
        self.step() / 2.0
    }

    pub fn max_magnitude(&self) -> f64 {
        let magnitude_bits = match self.signedness {
            Signedness::SignMagnitude => self.integer_bits - 1,
            Signedness::Unsigned => self.integer_bits,
        };
        (magnitude_bits as f64).exp2() - self.step()
    }

    fn min_value(&self) -> f64 {
        match self.signedness {
            Signedness::SignMagnitude => -self.max_magnitude(),
            Signedness::Unsigned => 0.0,
        }
    }

    pub fn saturate(&self, x: f64) -> f64 {
        x.clamp(self.min_value(), self.max_magnitude())
    }

    /// Nearest multiple of the step, ties away from zero, then saturate.
    pub fn quantize(&self, x: f64) -> f64 {
        let step = self.step();
        self.saturate((x / step).round() * step)
    }

    pub fn saturating_add(&self, a: f64, b: f64) -> f64 {
        self.saturate(a + b)
    }
}

/// Bit widths for channel LLRs, internal LLRs and path metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationProfile {
    pub received_llr: FixedPointFormat,
    pub internal_llr: FixedPointFormat,
    pub path_metric: FixedPointFormat,
}

impl QuantizationProfile {
    /// Widths used for a given code: received (4,2), internal (6,2) and
    /// PM (7,2), except PM (8,2) for n = 8192 at rate 0.25.
    pub fn for_code(n: usize, rate: f64) -> Self {
        let pm_int = if n == 8192 && (rate - 0.25).abs() < 1e-9 {
            8
        } else {
            7
        };
        Self {
            received_llr: FixedPointFormat::signed(4, 2),
            internal_llr: FixedPointFormat::signed(6, 2),
            path_metric: FixedPointFormat::unsigned(pm_int, 2),
        }
    }

    /// Rounding error of received LLRs.
    pub fn epsilon(&self) -> f64 {
        self.received_llr.epsilon()
    }
}

impl Default for QuantizationProfile {
    fn default() -> Self {
        Self::for_code(4096, 0.5)
    }
}
