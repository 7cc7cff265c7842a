//! Monte-Carlo harness: Eb/N0 sweeps over decoder arms, seeded so that a
//! point's aggregate depends only on (seed, arm, Eb/N0).
//!
//! Frame `f` at a given Eb/N0 draws its message and channel noise from
//! `stream_rng(seed, ebn0_domain(ebn0), f)`, so every arm sees the same
//! noise. Frames are decoded in parallel chunks and folded back in frame
//! order; the stop rule truncates at the exact frame that reaches the error
//! target.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{demodulate_llr, ebn0_domain, modulate, sigma_from_ebn0, stream_rng, transmit};
use crate::code_spec::{build_code_spec, partitioned_crc_layout, single_crc_layout, CodeError, CodeSpec, CrcPolynomial};
use crate::cost::{CostEvent, OpCounter};
use crate::enhance::{default_sigma_p, enhanced_decode, EnhanceConfig, EnhanceError, Scheme};
use crate::fixedpoint::{FixedPointFormat, QuantizationProfile};
use crate::gpscl::{GpsclDecoder, PartitionPlan};
use crate::ida::{count_unreliable_quantized, count_unreliable, IdaConfig, IdaError};
use crate::scl::{DecodeError, DecoderOptions, FrameDecoder, PmMode, SclDecoder, SpcVariant};

const PERTURB_DOMAIN: u64 = 1 << 40;
const MAX_LIST: usize = 64;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown preset {name:?}; valid presets: {}", valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<String> },
    #[error("no records to emit")]
    NoRecords,
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Enhance(#[from] EnhanceError),
    #[error(transparent)]
    Ida(#[from] IdaError),
    #[error("cannot parse configuration: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Stop rules for one (arm, Eb/N0) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
    /// Frames per work unit.
    pub chunk_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_frame_errors: 100,
            max_frames: 10_000_000,
            chunk_frames: 64,
        }
    }
}

/// An arm as written in a configuration file: a preset name and/or explicit
/// fields, the latter overriding the former.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_list: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ida_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ida_phi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantized: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pm_mode: Option<PmMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spc_variant: Option<SpcVariant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fast: Option<bool>,
}

impl ArmEntry {
    pub fn preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            ..Self::default()
        }
    }
}

/// Fully resolved decoder arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub name: String,
    /// List size, the large one for IDA arms.
    pub list: usize,
    /// 1 for a single CRC-16, 2 for CRC-6 + CRC-10 partitions.
    pub partitions: usize,
    pub crossover: usize,
    /// `None` decodes once.
    pub enhance: Option<EnhanceConfig>,
    /// List size for attempts after the first; `None` keeps `list`.
    pub second_list: Option<usize>,
    pub ida: Option<IdaConfig>,
    pub quantized: bool,
    pub pm_mode: PmMode,
    pub spc_variant: SpcVariant,
    pub fast: bool,
}

const BASE_PRESETS: [&str; 12] = [
    "scl-8",
    "scl-16",
    "scl-32",
    "rpe-scl8-t10",
    "pe-scl8-t2",
    "pe-scl8-sc-t2",
    "be-scl8-t2",
    "be-scl4-t2",
    "gpscl8-s2",
    "be-gpscl8-s1",
    "be-gpscl8-s2",
    "ida-be-gpscl8",
];

/// All preset names, each base arm followed by its `-quant` variant.
pub fn preset_names() -> Vec<String> {
    BASE_PRESETS
        .iter()
        .flat_map(|b| [b.to_string(), format!("{b}-quant")])
        .collect()
}

/// Named arm for a code of length `n` and rate `rate`.
pub fn preset(name: &str, n: usize, rate: f64) -> Result<ArmConfig, SimError> {
    let (base, quantized) = match name.strip_suffix("-quant") {
        Some(b) => (b, true),
        None => (name, false),
    };
    if !BASE_PRESETS.contains(&base) {
        return Err(SimError::UnknownPreset {
            name: name.to_string(),
            valid: preset_names(),
        });
    }
    let sigma_p = default_sigma_p(rate);
    let enh = |scheme, t| EnhanceConfig::new(scheme, t, sigma_p);
    let mut arm = ArmConfig {
        name: name.to_string(),
        list: 8,
        partitions: 1,
        crossover: 1,
        enhance: None,
        second_list: None,
        ida: None,
        quantized,
        pm_mode: PmMode::Approx,
        spc_variant: SpcVariant::Exact,
        fast: true,
    };
    match base {
        "scl-8" => {}
        "scl-16" => arm.list = 16,
        "scl-32" => arm.list = 32,
        "rpe-scl8-t10" => arm.enhance = Some(enh(Scheme::Rpe, 10)?),
        "pe-scl8-t2" => arm.enhance = Some(enh(Scheme::Pe, 2)?),
        "pe-scl8-sc-t2" => {
            arm.enhance = Some(enh(Scheme::Pe, 2)?);
            arm.second_list = Some(1);
        }
        "be-scl8-t2" => arm.enhance = Some(enh(Scheme::Be, 2)?),
        "be-scl4-t2" => {
            arm.list = 4;
            arm.enhance = Some(enh(Scheme::Be, 2)?);
        }
        "gpscl8-s2" => (arm.partitions, arm.crossover) = (2, 2),
        "be-gpscl8-s1" => {
            (arm.partitions, arm.crossover) = (2, 1);
            arm.enhance = Some(enh(Scheme::Be, 2)?);
        }
        "be-gpscl8-s2" => {
            (arm.partitions, arm.crossover) = (2, 2);
            arm.enhance = Some(enh(Scheme::Be, 2)?);
        }
        "ida-be-gpscl8" => {
            (arm.partitions, arm.crossover) = (2, 2);
            arm.enhance = Some(enh(Scheme::Be, 2)?);
            arm.ida = Some(IdaConfig::preset(n, rate, quantized)?);
        }
        _ => unreachable!(),
    }
    Ok(arm)
}

impl ArmConfig {
    /// Apply an entry on top of its preset (or on top of plain SCL-8 when
    /// no preset is named).
    pub fn resolve(entry: &ArmEntry, n: usize, rate: f64) -> Result<Self, SimError> {
        let mut arm = match &entry.preset {
            Some(p) => preset(p, n, rate)?,
            None => {
                let mut a = preset("scl-8", n, rate)?;
                a.name = entry
                    .name
                    .clone()
                    .ok_or_else(|| SimError::Config("an arm needs a preset or a name".into()))?;
                a
            }
        };
        if let Some(v) = &entry.name {
            arm.name = v.clone();
        }
        if let Some(v) = entry.list {
            arm.list = v;
        }
        if let Some(v) = entry.partitions {
            arm.partitions = v;
        }
        if let Some(v) = entry.crossover {
            arm.crossover = v;
        }
        if let Some(v) = entry.quantized {
            arm.quantized = v;
            if let (Some(ida), None, None) = (&mut arm.ida, entry.ida_gamma, entry.ida_phi) {
                *ida = IdaConfig::preset(n, rate, v)?;
            }
        }
        if entry.scheme.is_some() || entry.attempts.is_some() || entry.sigma_p.is_some() {
            let base = arm.enhance;
            let scheme = entry.scheme.or(base.map(|e| e.scheme)).unwrap_or(Scheme::Be);
            let attempts = entry.attempts.or(base.map(|e| e.max_attempts)).unwrap_or(2);
            let sigma_p = entry.sigma_p.or(base.map(|e| e.sigma_p)).unwrap_or(default_sigma_p(rate));
            arm.enhance = Some(EnhanceConfig::new(scheme, attempts, sigma_p)?);
        }
        if let Some(v) = entry.second_list {
            arm.second_list = Some(v);
        }
        if entry.ida_gamma.is_some() || entry.ida_phi.is_some() {
            let base = arm.ida.or_else(|| IdaConfig::preset(n, rate, arm.quantized).ok());
            let gamma = entry.ida_gamma.or(base.map(|c| c.gamma));
            let phi = entry.ida_phi.or(base.map(|c| c.phi));
            let (Some(gamma), Some(phi)) = (gamma, phi) else {
                return Err(SimError::Config(format!(
                    "arm {}: ida needs both ida_gamma and ida_phi for n={n}, rate={rate}",
                    arm.name
                )));
            };
            let mut cfg = IdaConfig::new(gamma, phi, 4, arm.list)?;
            if arm.quantized {
                cfg.epsilon_adjust = QuantizationProfile::for_code(n, rate).epsilon();
            }
            arm.ida = Some(cfg);
        }
        if let Some(v) = entry.pm_mode {
            arm.pm_mode = v;
        }
        if let Some(v) = entry.spc_variant {
            arm.spc_variant = v;
        }
        if let Some(v) = entry.fast {
            arm.fast = v;
        }
        arm.validate()?;
        Ok(arm)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(format!("arm {}: {msg}", self.name)));
        let list_ok = |l: usize| l.is_power_of_two() && l <= MAX_LIST;
        if !list_ok(self.list) {
            return bad(format!("list size {} is not a power of two in 1..={MAX_LIST}", self.list));
        }
        if let Some(l) = self.second_list {
            if !list_ok(l) {
                return bad(format!("second list size {l} is not a power of two in 1..={MAX_LIST}"));
            }
        }
        if !matches!(self.partitions, 1 | 2) {
            return bad(format!("partitions must be 1 or 2, got {}", self.partitions));
        }
        if self.crossover == 0 || self.crossover > self.list {
            return bad(format!("crossover {} outside 1..={}", self.crossover, self.list));
        }
        if let Some(ida) = &self.ida {
            if ida.large_list != self.list {
                return bad(format!("ida large list {} differs from list {}", ida.large_list, self.list));
            }
            if ida.small_list < self.crossover {
                return bad(format!("ida small list {} below crossover {}", ida.small_list, self.crossover));
            }
        }
        if let Some(l) = self.second_list {
            if self.partitions > 1 && l < self.crossover {
                return bad(format!("second list {l} below crossover {}", self.crossover));
            }
        }
        Ok(())
    }

    /// CRC-16 over the whole message, or CRC-6 and CRC-10 over the halves.
    pub fn code_spec(&self, n: usize, rate: f64) -> Result<CodeSpec, SimError> {
        let message = message_len(n, rate)?;
        let layout = if self.partitions == 1 {
            single_crc_layout(n, CrcPolynomial::CRC16)
        } else {
            partitioned_crc_layout(n, &[CrcPolynomial::CRC6, CrcPolynomial::CRC10])
        };
        Ok(build_code_spec(n, message, &layout)?)
    }

    pub fn decoder_options(&self, n: usize, rate: f64) -> DecoderOptions {
        DecoderOptions {
            pm_mode: self.pm_mode,
            spc_variant: self.spc_variant,
            fast: self.fast,
            quantization: self.quantized.then(|| QuantizationProfile::for_code(n, rate)),
            ..DecoderOptions::default()
        }
    }
}

fn message_len(n: usize, rate: f64) -> Result<usize, SimError> {
    let m = rate * n as f64;
    if !(rate > 0.0 && rate < 1.0) || (m - m.round()).abs() > 1e-9 {
        return Err(SimError::Config(format!("rate {rate} does not give an integer message length at n={n}")));
    }
    Ok(m.round() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub rate: f64,
    pub ebn0_db: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(rename = "arm", default)]
    pub arms: Vec<ArmEntry>,
}

fn default_seed() -> u64 {
    1
}

fn default_workers() -> usize {
    1
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Check everything that can fail before simulation, returning the
    /// resolved arms.
    pub fn resolve(&self) -> Result<Vec<ArmConfig>, SimError> {
        if self.arms.is_empty() {
            return Err(SimError::Config("no arms".into()));
        }
        if self.ebn0_db.is_empty() || self.ebn0_db.iter().any(|e| !e.is_finite()) {
            return Err(SimError::Config("ebn0_db must be a non-empty list of finite values".into()));
        }
        if self.stop.min_frame_errors == 0 || self.stop.max_frames == 0 || self.stop.chunk_frames == 0 {
            return Err(SimError::Config("stop rules must be positive".into()));
        }
        if self.workers == 0 {
            return Err(SimError::Config("workers must be positive".into()));
        }
        let arms = self
            .arms
            .iter()
            .map(|a| ArmConfig::resolve(a, self.n, self.rate))
            .collect::<Result<Vec<_>, _>>()?;
        let mut seen = HashSet::new();
        for arm in &arms {
            if !seen.insert(arm.name.as_str()) {
                return Err(SimError::Config(format!("duplicate arm name {}", arm.name)));
            }
            arm.code_spec(self.n, self.rate)?;
        }
        Ok(arms)
    }
}

/// Per-frame result.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameResult {
    pub frame_error: bool,
    pub bit_errors: u64,
    pub attempts: u64,
    pub list_sum: u64,
    pub ops: OpCounter,
}

/// Sums over frames. Merging is associative and commutative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tally {
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub attempts: u64,
    pub first_attempt_failures: u64,
    pub list_sum: u64,
    pub ops: OpCounter,
}

impl Tally {
    pub fn add(&mut self, r: &FrameResult) {
        self.frames += 1;
        self.frame_errors += u64::from(r.frame_error);
        self.bit_errors += r.bit_errors;
        self.attempts += r.attempts;
        self.first_attempt_failures += u64::from(r.attempts > 1);
        self.list_sum += r.list_sum;
        self.ops += r.ops;
    }

    pub fn merge(&mut self, other: &Tally) {
        self.frames += other.frames;
        self.frame_errors += other.frame_errors;
        self.bit_errors += other.bit_errors;
        self.attempts += other.attempts;
        self.first_attempt_failures += other.first_attempt_failures;
        self.list_sum += other.list_sum;
        self.ops += other.ops;
    }

    pub fn record(&self, arm: &str, ebn0_db: f64, message_len: usize) -> SimRecord {
        let f = self.frames.max(1) as f64;
        SimRecord {
            arm: arm.to_string(),
            ebn0_db,
            frames: self.frames,
            frame_errors: self.frame_errors,
            fer: self.frame_errors as f64 / f,
            ber: self.bit_errors as f64 / (f * message_len as f64),
            avg_attempts: 1.0 + (self.attempts - self.frames) as f64 / f,
            avg_list: self.list_sum as f64 / f,
            adds: self.ops.additions as f64 / f,
            compares: self.ops.comparisons as f64 / f,
            selects: self.ops.selections as f64 / f,
            total_ops: self.ops.total() as f64 / f,
            bit_errors: self.bit_errors,
            attempts: self.attempts,
            first_attempt_failures: self.first_attempt_failures,
            wall_time_s: 0.0,
        }
    }
}

/// Aggregate for one (arm, Eb/N0) point. Op counts are per-frame averages.
/// `wall_time_s` is not written to CSV and is ignored by equality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimRecord {
    pub arm: String,
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub ber: f64,
    pub avg_attempts: f64,
    pub avg_list: f64,
    pub adds: f64,
    pub compares: f64,
    pub selects: f64,
    pub total_ops: f64,
    pub bit_errors: u64,
    pub attempts: u64,
    pub first_attempt_failures: u64,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl PartialEq for SimRecord {
    fn eq(&self, o: &Self) -> bool {
        self.arm == o.arm
            && self.ebn0_db == o.ebn0_db
            && self.frames == o.frames
            && self.frame_errors == o.frame_errors
            && self.fer == o.fer
            && self.ber == o.ber
            && self.avg_attempts == o.avg_attempts
            && self.avg_list == o.avg_list
            && self.adds == o.adds
            && self.compares == o.compares
            && self.selects == o.selects
            && self.total_ops == o.total_ops
            && self.bit_errors == o.bit_errors
            && self.attempts == o.attempts
            && self.first_attempt_failures == o.first_attempt_failures
    }
}

impl SimRecord {
    /// Normal-approximation 95% interval on the FER.
    pub fn fer_ci95(&self) -> (f64, f64) {
        let half = 1.96 * (self.fer * (1.0 - self.fer) / self.frames.max(1) as f64).sqrt();
        ((self.fer - half).max(0.0), (self.fer + half).min(1.0))
    }

    fn key(&self) -> (String, u64) {
        (self.arm.clone(), ebn0_domain(self.ebn0_db))
    }
}

/// Decoders for one arm at one Eb/N0, reused across frames.
pub struct ArmRunner {
    arm: ArmConfig,
    spec: Arc<CodeSpec>,
    sigma: f64,
    seed: u64,
    domain: u64,
    enhance: EnhanceConfig,
    first: Box<dyn FrameDecoder + Send>,
    second: Option<Box<dyn FrameDecoder + Send>>,
    received: Option<FixedPointFormat>,
}

impl ArmRunner {
    pub fn new(arm: &ArmConfig, n: usize, rate: f64, ebn0_db: f64, seed: u64) -> Result<Self, SimError> {
        arm.validate()?;
        let spec = Arc::new(arm.code_spec(n, rate)?);
        let options = arm.decoder_options(n, rate);
        let build = |list: usize, capacity: usize| -> Result<Box<dyn FrameDecoder + Send>, SimError> {
            if arm.partitions > 1 && list >= arm.crossover {
                let plan = PartitionPlan::for_spec(&spec, arm.crossover)?;
                Ok(Box::new(GpsclDecoder::with_capacity(spec.clone(), plan, list, capacity, options)?))
            } else {
                Ok(Box::new(SclDecoder::with_capacity(spec.clone(), list, capacity, options)?))
            }
        };
        let first = build(arm.list, arm.list)?;
        let second = match (arm.second_list, arm.ida, arm.enhance) {
            (_, _, None) => None,
            (Some(l), _, _) => Some(build(l, l)?),
            (None, Some(_), _) => Some(build(arm.list, arm.list)?),
            (None, None, _) => None,
        };
        let enhance = match arm.enhance {
            Some(e) => e,
            None => EnhanceConfig::new(Scheme::Be, 1, 0.0)?,
        };
        Ok(Self {
            sigma: sigma_from_ebn0(ebn0_db, spec.effective_rate()),
            spec,
            seed,
            domain: ebn0_domain(ebn0_db),
            enhance,
            first,
            second,
            received: arm.quantized.then(|| QuantizationProfile::for_code(n, rate).received_llr),
            arm: arm.clone(),
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Message and received symbols of frame `frame`; identical for every
    /// arm whose code has the same message length.
    pub fn channel_frame(&self, frame: u64) -> Result<(Vec<u8>, Vec<f64>), SimError> {
        let mut rng = stream_rng(self.seed, self.domain, frame);
        let message: Vec<u8> = (0..self.spec.message_len()).map(|_| rng.random::<bool>() as u8).collect();
        let codeword = self.spec.encode(&message)?;
        let y = transmit(&modulate(&codeword), self.sigma, &mut rng);
        Ok((message, y))
    }

    pub fn run_frame(&mut self, frame: u64) -> Result<FrameResult, SimError> {
        let (message, y) = self.channel_frame(frame)?;
        let mut ida_ops = OpCounter::default();
        if let Some(ida) = &self.arm.ida {
            let llrs = demodulate_llr(&y, self.sigma).map_err(EnhanceError::from)?;
            let count = match &self.received {
                Some(fmt) => count_unreliable_quantized(&llrs, ida.grid_gamma(), fmt),
                None => count_unreliable(&llrs, ida.gamma),
            };
            let list = if count < ida.phi { ida.small_list } else { ida.large_list };
            self.first.set_list_size(list)?;
            ida_ops.charge(CostEvent::Ida { n: y.len() });
        }
        let mut rng = stream_rng(self.seed, self.domain.wrapping_add(PERTURB_DOMAIN), frame);
        let second: Option<&mut dyn FrameDecoder> = match self.second.as_deref_mut() {
            Some(d) => Some(d),
            None => None,
        };
        let out = enhanced_decode(&y, self.sigma, &self.enhance, self.first.as_mut(), second, &mut rng)?;
        let bit_errors = out.result.message.iter().zip(&message).filter(|(a, b)| a != b).count() as u64;
        Ok(FrameResult {
            frame_error: out.result.message != message,
            bit_errors,
            attempts: out.attempts as u64,
            list_sum: out.list_sum as u64,
            ops: out.ops + ida_ops,
        })
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, SimError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Config(format!("cannot start {workers} workers: {e}")))
}

/// Simulate one point on an existing pool.
fn simulate_on(
    pool: &rayon::ThreadPool,
    arm: &ArmConfig,
    config: &SimConfig,
    ebn0_db: f64,
) -> Result<SimRecord, SimError> {
    let start = Instant::now();
    let (n, rate, stop) = (config.n, config.rate, config.stop);
    let probe = ArmRunner::new(arm, n, rate, ebn0_db, config.seed)?;
    let message = probe.spec().message_len();
    drop(probe);
    let per_round = (pool.current_num_threads() as u64 * 4).max(1);
    let mut tally = Tally::default();
    let mut next = 0u64;
    'rounds: while next < stop.max_frames {
        let starts: Vec<u64> = (0..per_round)
            .map(|i| next + i * stop.chunk_frames)
            .filter(|&s| s < stop.max_frames)
            .collect();
        let chunks: Vec<Result<Vec<FrameResult>, SimError>> = pool.install(|| {
            starts
                .par_iter()
                .map_init(
                    || ArmRunner::new(arm, n, rate, ebn0_db, config.seed),
                    |runner, &s| {
                        let runner = runner.as_mut().map_err(|e| SimError::Config(e.to_string()))?;
                        let end = (s + stop.chunk_frames).min(stop.max_frames);
                        (s..end).map(|f| runner.run_frame(f)).collect()
                    },
                )
                .collect()
        });
        for chunk in chunks {
            for r in chunk? {
                tally.add(&r);
                if tally.frame_errors >= stop.min_frame_errors {
                    break 'rounds;
                }
            }
        }
        next = starts.last().map_or(stop.max_frames, |s| s + stop.chunk_frames);
    }
    let mut rec = tally.record(&arm.name, ebn0_db, message);
    rec.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rec)
}

/// Simulate a single (arm, Eb/N0) point.
pub fn simulate_point(arm: &ArmConfig, config: &SimConfig, ebn0_db: f64) -> Result<SimRecord, SimError> {
    let pool = thread_pool(config.workers)?;
    simulate_on(&pool, arm, config, ebn0_db)
}

/// Every (Eb/N0, arm) point of the config, Eb/N0-major.
pub fn run_sweep(config: &SimConfig) -> Result<Vec<SimRecord>, SimError> {
    run_sweep_skipping(config, &[])
}

/// Like [`run_sweep`] but skips points already present in `done`.
pub fn run_sweep_skipping(config: &SimConfig, done: &[SimRecord]) -> Result<Vec<SimRecord>, SimError> {
    let arms = config.resolve()?;
    let skip: HashSet<(String, u64)> = done.iter().map(SimRecord::key).collect();
    let pool = thread_pool(config.workers)?;
    let mut out = Vec::new();
    for &ebn0 in &config.ebn0_db {
        for arm in &arms {
            if skip.contains(&(arm.name.clone(), ebn0_domain(ebn0))) {
                continue;
            }
            out.push(simulate_on(&pool, arm, config, ebn0)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Csv,
        }
    }
}

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

pub fn to_csv(records: &[SimRecord]) -> Result<String, SimError> {
    if records.is_empty() {
        return Err(SimError::NoRecords);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| SimError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<SimRecord>, SimError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<SimRecord>, _>>()?)
}

pub fn to_json(records: &[SimRecord], config: Option<&SimConfig>) -> Result<String, SimError> {
    if records.is_empty() {
        return Err(SimError::NoRecords);
    }
    let rows: Vec<serde_json::Value> = records
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r)?;
            v["wall_time_s"] = serde_json::json!(r.wall_time_s);
            Ok(v)
        })
        .collect::<Result<_, serde_json::Error>>()?;
    let doc = serde_json::json!({
        "version": version_string(),
        "config": config,
        "records": rows,
    });
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Write records to `path`. CSV output appends to an existing file and
/// skips (arm, Eb/N0) rows already in it; JSON output replaces the file.
pub fn emit_results(
    records: &[SimRecord],
    format: OutputFormat,
    path: &Path,
    config: Option<&SimConfig>,
) -> Result<(), SimError> {
    if records.is_empty() {
        return Err(SimError::NoRecords);
    }
    match format {
        OutputFormat::Json => {
            let text = to_json(records, config)?;
            std::fs::write(path, text)?;
        }
        OutputFormat::Csv => {
            let existing = load_records(path)?;
            let seen: HashSet<(String, u64)> = existing.iter().map(SimRecord::key).collect();
            let fresh: Vec<SimRecord> = records.iter().filter(|r| !seen.contains(&r.key())).cloned().collect();
            if existing.is_empty() {
                std::fs::write(path, to_csv(&fresh)?)?;
            } else if !fresh.is_empty() {
                let text = to_csv(&fresh)?;
                let body = text.split_once('\n').map_or("", |(_, b)| b);
                let mut f = OpenOptions::new().append(true).open(path)?;
                f.write_all(body.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Records in a CSV file; a missing or empty file has none.
pub fn load_records(path: &Path) -> Result<Vec<SimRecord>, SimError> {
    match File::open(path) {
        Ok(_) => {
            let text = std::fs::read_to_string(path)?;
            if text.trim().is_empty() {
                return Ok(Vec::new());
            }
            from_csv(&text)
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}
