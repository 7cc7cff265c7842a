//! Generalized partitioned SCL: list decoding inside `P` equal partitions,
//! `S` survivors handed across each partition border, `S` codewords out.

use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::code_spec::CodeSpec;
use crate::fixedpoint::QuantizationProfile;
use crate::scl::{AttemptTrace, DecodeError, DecoderOptions, FrameDecoder, ListDecoder};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub partitions: usize,
    pub crossover: usize,
    pub boundaries: Vec<Range<usize>>,
}

impl PartitionPlan {
    /// Plan matching the CRC spans of `spec`, which must be equal-size tiles.
    pub fn for_spec(spec: &CodeSpec, crossover: usize) -> Result<Self, DecodeError> {
        let partitions = spec.partitions();
        let bad = DecodeError::BadPartitions { partitions };
        if !partitions.is_power_of_two() || crossover == 0 {
            return Err(bad);
        }
        let width = spec.n() / partitions;
        let boundaries: Vec<Range<usize>> = (0..partitions).map(|p| spec.partition_span(p)).collect();
        let tiled = boundaries
            .iter()
            .enumerate()
            .all(|(p, r)| *r == (p * width..(p + 1) * width));
        if !tiled {
            return Err(bad);
        }
        Ok(Self {
            partitions,
            crossover,
            boundaries,
        })
    }
}

/// Reusable GPSCL decoder.
#[derive(Debug, Clone)]
pub struct GpsclDecoder {
    plan: PartitionPlan,
    list: usize,
    inner: ListDecoder,
}

impl GpsclDecoder {
    pub fn new(
        spec: Arc<CodeSpec>,
        plan: PartitionPlan,
        list: usize,
        options: DecoderOptions,
    ) -> Result<Self, DecodeError> {
        if plan.crossover > list {
            return Err(DecodeError::BadCrossover {
                survivors: plan.crossover,
                list,
            });
        }
        let inner = ListDecoder::new(spec, options, plan.partitions, list)?;
        Ok(Self { plan, list, inner })
    }

    pub fn plan(&self) -> &PartitionPlan {
        &self.plan
    }

    pub fn list_size(&self) -> usize {
        self.list
    }

    pub fn spec(&self) -> &CodeSpec {
        self.inner.spec()
    }

    /// The returned trace holds exactly `S` ranked codewords (fewer only if
    /// the code admits fewer distinct paths).
    pub fn decode(&mut self, llrs: &[f64]) -> Result<AttemptTrace, DecodeError> {
        self.inner.decode(llrs, self.list, Some(self.plan.crossover))
    }

    /// Allocate for up to `max_list` paths so the list size can change
    /// between frames.
    pub fn with_capacity(
        spec: Arc<CodeSpec>,
        plan: PartitionPlan,
        list: usize,
        max_list: usize,
        options: DecoderOptions,
    ) -> Result<Self, DecodeError> {
        if plan.crossover > list {
            return Err(DecodeError::BadCrossover {
                survivors: plan.crossover,
                list,
            });
        }
        let inner = ListDecoder::new(spec, options, plan.partitions, max_list.max(list))?;
        Ok(Self { plan, list, inner })
    }
}

impl FrameDecoder for GpsclDecoder {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<AttemptTrace, DecodeError> {
        self.decode(llrs)
    }

    fn list_size(&self) -> usize {
        self.list
    }

    fn set_list_size(&mut self, list: usize) -> Result<(), DecodeError> {
        if list < self.plan.crossover {
            return Err(DecodeError::BadCrossover {
                survivors: self.plan.crossover,
                list,
            });
        }
        if !list.is_power_of_two() || list > self.inner.max_list() {
            return Err(DecodeError::BadListSize { got: list, max: self.inner.max_list() });
        }
        self.list = list;
        Ok(())
    }
}

/// One-shot GPSCL decode.
pub fn gpscl_decode(
    spec: &CodeSpec,
    llrs: &[f64],
    plan: &PartitionPlan,
    list: usize,
    options: DecoderOptions,
) -> Result<AttemptTrace, DecodeError> {
    GpsclDecoder::new(Arc::new(spec.clone()), plan.clone(), list, options)?.decode(llrs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryKind {
    Scl,
    Gpscl,
}

/// Storage bits of the decoder: channel LLRs, internal LLRs, path metrics
/// and partial sums.
pub fn memory_bits(
    kind: MemoryKind,
    n: usize,
    list: usize,
    partitions: usize,
    crossover: usize,
    profile: &QuantizationProfile,
) -> u64 {
    let (n, l) = (n as u64, list as u64);
    let q_llr = profile.received_llr.width() as u64;
    let q_alpha = profile.internal_llr.width() as u64;
    let q_pm = profile.path_metric.width() as u64;
    match kind {
        MemoryKind::Scl => n * q_llr + (n - 1) * l * q_alpha + l * q_pm + (2 * n - 1) * l,
        MemoryKind::Gpscl => {
            let p = partitions.max(1) as u64;
            let s = crossover as u64;
            let upper: u64 = (1..=p.trailing_zeros()).map(|i| n >> i).sum();
            n * q_llr
                + (s * upper + l * (n / p - 1)) * q_alpha
                + l * q_pm
                + s * upper
                + l * (2 * n / p - 1)
        }
    }
}
