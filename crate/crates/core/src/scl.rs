//! Successive-cancellation list decoding over a [`Schedule`].
//!
//! Path storage uses reference-counted slots per tree level: cloning a path
//! only copies slot indices, and a path that writes to a shared slot is moved
//! to a free one first. Paths whose inputs share the same slots share the
//! computed outputs too.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_spec::{polar_transform, CodeSpec};
use crate::cost::{CostEvent, OpCounter};
use crate::fixedpoint::QuantizationProfile;
use crate::sc_kernel::{f_update, g_update, minsum, NodeClass, NodeKind, Schedule, ScheduleOptions, SoftUpdate, Step};

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("list size must be a power of two in 1..={max}, got {got}")]
    BadListSize { got: usize, max: usize },
    #[error("expected {expected} LLRs, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("crossover {survivors} exceeds list size {list}")]
    BadCrossover { survivors: usize, list: usize },
    #[error("partition count {partitions} does not divide the code into CRC spans")]
    BadPartitions { partitions: usize },
    #[error("node {kind:?} of length {len} cannot be decoded here")]
    BadNode { kind: NodeKind, len: usize },
}

/// Path-metric penalty for single-bit decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmMode {
    /// `|l|` on disagreement with the hard decision.
    #[default]
    Approx,
    /// `ln(1 + exp(-(1 - 2u) l))`.
    Exact,
}

/// PM increment rule for SPC node enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpcVariant {
    /// `|a_t| + (-1)^parity |a_min|`.
    Approx,
    /// `|a_t| - (-1)^parity (-1)^flips |a_min|`, the exact parity penalty.
    #[default]
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderOptions {
    pub pm_mode: PmMode,
    pub spc_variant: SpcVariant,
    pub soft_update: SoftUpdate,
    /// Decode special nodes in one step; otherwise bit by bit.
    pub fast: bool,
    pub quantization: Option<QuantizationProfile>,
}

impl Default for DecoderOptions {
    fn default() -> Self {
        Self {
            pm_mode: PmMode::Approx,
            spc_variant: SpcVariant::Exact,
            soft_update: SoftUpdate::MinSum,
            fast: true,
            quantization: None,
        }
    }
}

impl DecoderOptions {
    /// Bit-by-bit decoding with exact updates and metrics.
    pub fn reference() -> Self {
        Self {
            pm_mode: PmMode::Exact,
            spc_variant: SpcVariant::Exact,
            soft_update: SoftUpdate::Exact,
            fast: false,
            quantization: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    pub pm: f64,
    pub codeword: Vec<u8>,
    pub u_hat: Vec<u8>,
    pub message: Vec<u8>,
    pub crc_ok: bool,
}

/// Result of one decoding attempt; `paths` is ranked with CRC-passing paths
/// first, each group by ascending PM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptTrace {
    pub list_size: usize,
    pub paths: Vec<PathOutcome>,
    pub ops: OpCounter,
}

impl AttemptTrace {
    pub fn selected(&self) -> &PathOutcome {
        &self.paths[0]
    }

    pub fn crc_pass(&self) -> bool {
        self.paths.first().is_some_and(|p| p.crc_ok)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

/// One expanded candidate: parent path, metric and a decision descriptor.
/// For bit leaves and repetition nodes `flips` is the chosen bit; for rate-1
/// and SPC nodes bit `t` flips the `t`-th least reliable position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub origin: usize,
    pub pm: f64,
    pub flips: u64,
    pub weight: u32,
}

/// A fully materialized node decision.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDecision {
    pub origin: usize,
    pub pm: f64,
    pub bits: Vec<u8>,
}

#[derive(Debug, Default, Clone)]
struct NodeScratch {
    order: Vec<Vec<usize>>,
    parity: Vec<u8>,
    cands: Vec<Candidate>,
    next: Vec<Candidate>,
}

#[derive(Debug, Clone, Copy)]
struct PmArith {
    limit: Option<crate::fixedpoint::FixedPointFormat>,
}

impl PmArith {
    #[inline]
    fn add(&self, pm: f64, inc: f64) -> f64 {
        match self.limit {
            Some(f) => f.saturating_add(pm, inc),
            None => pm + inc,
        }
    }
}

#[inline]
fn hd(a: f64) -> u8 {
    u8::from(a < 0.0)
}

#[inline]
fn exact_penalty(a: f64, bit: u8) -> f64 {
    let x = if bit == 0 { -a } else { a };
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// PM after deciding bit `u` on a leaf with LLR `l`.
pub fn pm_update_bit(pm: f64, l: f64, u: u8, mode: PmMode) -> f64 {
    match mode {
        PmMode::Approx if hd(l) != u => pm + l.abs(),
        PmMode::Approx => pm,
        PmMode::Exact => pm + exact_penalty(l, u),
    }
}

/// Indices of the `list` smallest metrics, ties to the lower index.
pub fn sort_and_prune(pms: &[f64], list: usize, ops: &mut OpCounter) -> Vec<usize> {
    let mut cands: Vec<Candidate> = pms
        .iter()
        .enumerate()
        .map(|(i, &pm)| Candidate { origin: i, pm, flips: 0, weight: 0 })
        .collect();
    prune(&mut cands, list, ops);
    cands.iter().map(|c| c.origin).collect()
}

/// Stable sort by PM and keep the best `list`; charges the sorter.
fn prune(cands: &mut Vec<Candidate>, list: usize, ops: &mut OpCounter) {
    if list > 1 {
        ops.charge(CostEvent::Sorter {
            metrics: cands.len(),
        });
    }
    if cands.len() > list {
        cands.sort_by(|a, b| a.pm.total_cmp(&b.pm));
        cands.truncate(list);
    }
}

/// Fill `order` with the indices of the `count` smallest `|alpha|`,
/// ascending, ties to the lower index. Returns the hard-decision parity.
fn least_reliable(alpha: &[f64], count: usize, order: &mut Vec<usize>) -> u8 {
    order.clear();
    let mut mags: [f64; 64] = [0.0; 64];
    let mut parity = 0u8;
    for (i, &a) in alpha.iter().enumerate() {
        parity ^= hd(a);
        let mag = a.abs();
        let len = order.len();
        if len == count && mag >= mags[len - 1] {
            continue;
        }
        let mut pos = if len == count { len - 1 } else { len };
        if len < count {
            order.push(i);
        }
        while pos > 0 && mags[pos - 1] > mag {
            mags[pos] = mags[pos - 1];
            order[pos] = order[pos - 1];
            pos -= 1;
        }
        mags[pos] = mag;
        order[pos] = i;
    }
    parity
}

#[allow(clippy::too_many_arguments)]
fn expand_node(
    node: &NodeClass,
    alphas: &[&[f64]],
    pms: &[f64],
    list: usize,
    opts: &DecoderOptions,
    pm: PmArith,
    scratch: &mut NodeScratch,
    ops: &mut OpCounter,
) -> Vec<Candidate> {
    let paths = alphas.len();
    let len = node.len();
    let mut cands = std::mem::take(&mut scratch.cands);
    cands.clear();
    if len == 1 {
        let a = alphas.iter().map(|x| x[0]);
        if node.kind == NodeKind::Rate0 {
            for (p, a) in a.enumerate() {
                let inc = match opts.pm_mode {
                    PmMode::Approx => if a < 0.0 { -a } else { 0.0 },
                    PmMode::Exact => exact_penalty(a, 0),
                };
                cands.push(Candidate { origin: p, pm: pm.add(pms[p], inc), flips: 0, weight: 0 });
            }
            ops.charge(CostEvent::PmUpdate { additions: paths });
            return cands;
        }
        for (p, a) in a.enumerate() {
            for bit in 0..2u8 {
                let inc = match opts.pm_mode {
                    PmMode::Approx => if hd(a) != bit { a.abs() } else { 0.0 },
                    PmMode::Exact => exact_penalty(a, bit),
                };
                cands.push(Candidate { origin: p, pm: pm.add(pms[p], inc), flips: bit as u64, weight: 0 });
            }
        }
        ops.charge(CostEvent::PmUpdate { additions: paths });
        prune(&mut cands, list, ops);
        return cands;
    }
    match node.kind {
        NodeKind::Rate0 => {
            for (p, alpha) in alphas.iter().enumerate() {
                let inc: f64 = alpha.iter().filter(|&&a| a < 0.0).map(|a| -a).sum();
                cands.push(Candidate { origin: p, pm: pm.add(pms[p], inc), flips: 0, weight: 0 });
            }
            ops.charge(CostEvent::PmUpdate { additions: paths * len });
        }
        NodeKind::Repetition => {
            for (p, alpha) in alphas.iter().enumerate() {
                let zero: f64 = alpha.iter().filter(|&&a| a < 0.0).map(|a| -a).sum();
                let one: f64 = alpha.iter().filter(|&&a| a > 0.0).sum();
                cands.push(Candidate { origin: p, pm: pm.add(pms[p], zero), flips: 0, weight: 0 });
                cands.push(Candidate { origin: p, pm: pm.add(pms[p], one), flips: 1, weight: 0 });
            }
            ops.charge(CostEvent::PmUpdate { additions: paths * len });
            prune(&mut cands, list, ops);
        }
        NodeKind::Rate1 => {
            let steps = (list - 1).min(len);
            prepare(alphas, steps, scratch);
            for p in 0..paths {
                cands.push(Candidate { origin: p, pm: pms[p], flips: 0, weight: 0 });
            }
            for t in 0..steps {
                let mut current = std::mem::take(&mut scratch.next);
                std::mem::swap(&mut current, &mut cands);
                cands.clear();
                for c in &current {
                    let a = alphas[c.origin][scratch.order[c.origin][t]].abs();
                    cands.push(*c);
                    cands.push(Candidate {
                        pm: pm.add(c.pm, a),
                        flips: c.flips | 1 << t,
                        weight: c.weight + 1,
                        ..*c
                    });
                }
                ops.charge(CostEvent::PmUpdate { additions: current.len() });
                scratch.next = current;
                prune(&mut cands, list, ops);
            }
        }
        NodeKind::Spc => {
            let steps = list.min(len);
            prepare(alphas, steps, scratch);
            for (p, alpha) in alphas.iter().enumerate() {
                let amin = alpha[scratch.order[p][0]].abs();
                let base = if scratch.parity[p] == 1 { pm.add(pms[p], amin) } else { pms[p] };
                cands.push(Candidate { origin: p, pm: base, flips: 0, weight: 0 });
            }
            ops.charge(CostEvent::PmUpdate { additions: paths });
            for t in 1..steps {
                let mut current = std::mem::take(&mut scratch.next);
                std::mem::swap(&mut current, &mut cands);
                cands.clear();
                for c in &current {
                    let order = &scratch.order[c.origin];
                    let alpha = alphas[c.origin];
                    let at = alpha[order[t]].abs();
                    let amin = alpha[order[0]].abs();
                    let gamma_sign = if scratch.parity[c.origin] == 1 { -1.0 } else { 1.0 };
                    let inc = match opts.spc_variant {
                        SpcVariant::Approx => at + gamma_sign * amin,
                        SpcVariant::Exact => {
                            let wt_sign = if (c.weight + 1) % 2 == 1 { -1.0 } else { 1.0 };
                            at - gamma_sign * wt_sign * amin
                        }
                    };
                    cands.push(*c);
                    cands.push(Candidate {
                        pm: pm.add(c.pm, inc),
                        flips: c.flips | 1 << t,
                        weight: c.weight + 1,
                        ..*c
                    });
                }
                ops.charge(CostEvent::PmUpdate { additions: 2 * current.len() });
                scratch.next = current;
                prune(&mut cands, list, ops);
            }
        }
        NodeKind::Generic => unreachable!("generic nodes are never leaves"),
    }
    cands
}

fn prepare(alphas: &[&[f64]], count: usize, scratch: &mut NodeScratch) {
    if scratch.order.len() < alphas.len() {
        scratch.order.resize_with(alphas.len(), Vec::new);
    }
    scratch.parity.clear();
    for (p, alpha) in alphas.iter().enumerate() {
        let parity = least_reliable(alpha, count.clamp(1, 64), &mut scratch.order[p]);
        scratch.parity.push(parity);
    }
}

/// Write the node output selected by `cand` into `out`.
fn materialize(kind: NodeKind, alpha: &[f64], cand: &Candidate, order: &[usize], parity: u8, out: &mut [u8]) {
    match kind {
        _ if alpha.len() == 1 => out[0] = if kind == NodeKind::Rate0 { 0 } else { cand.flips as u8 },
        NodeKind::Rate0 => out.fill(0),
        NodeKind::Repetition => out.fill(cand.flips as u8),
        NodeKind::Rate1 | NodeKind::Spc => {
            for (o, &a) in out.iter_mut().zip(alpha) {
                *o = hd(a);
            }
            let mut flips = cand.flips;
            while flips != 0 {
                let t = flips.trailing_zeros() as usize;
                out[order[t]] ^= 1;
                flips &= flips - 1;
            }
            if kind == NodeKind::Spc {
                let fixed = parity ^ (cand.weight as u8 & 1);
                out[order[0]] ^= fixed;
            }
        }
        NodeKind::Generic => unreachable!(),
    }
}

/// Decide a single special node for several parent paths; returns the
/// surviving decisions in rank order.
pub fn decode_node(
    node: &NodeClass,
    alphas: &[&[f64]],
    pms: &[f64],
    list: usize,
    opts: &DecoderOptions,
) -> Result<Vec<NodeDecision>, DecodeError> {
    let bad = DecodeError::BadNode { kind: node.kind, len: node.len() };
    let spc_too_short = node.kind == NodeKind::Spc && node.len() < 2;
    if node.kind == NodeKind::Generic || spc_too_short || list == 0 || alphas.len() != pms.len() {
        return Err(bad);
    }
    if alphas.iter().any(|a| a.len() != node.len()) {
        return Err(bad);
    }
    let mut scratch = NodeScratch::default();
    let mut ops = OpCounter::default();
    let arith = PmArith {
        limit: opts.quantization.map(|q| q.path_metric),
    };
    let mut cands = expand_node(node, alphas, pms, list, opts, arith, &mut scratch, &mut ops);
    cands.sort_by(|a, b| a.pm.total_cmp(&b.pm));
    Ok(cands
        .iter()
        .map(|c| {
            let mut bits = vec![0u8; node.len()];
            let (order, parity) = match node.kind {
                NodeKind::Rate1 | NodeKind::Spc if node.len() > 1 => {
                    (scratch.order[c.origin].as_slice(), scratch.parity[c.origin])
                }
                _ => (&[][..], 0),
            };
            materialize(node.kind, alphas[c.origin], c, order, parity, &mut bits);
            NodeDecision {
                origin: c.origin,
                pm: c.pm,
                bits,
            }
        })
        .collect())
}

const NONE: usize = usize::MAX;

/// Slot pool of one tree-level array.
#[derive(Debug, Clone)]
struct Pool<T> {
    width: usize,
    data: Vec<T>,
    map: Vec<usize>,
    rc: Vec<u32>,
    free: Vec<usize>,
}

impl<T: Copy + Default> Pool<T> {
    fn new(width: usize, slots: usize) -> Self {
        Self {
            width,
            data: vec![T::default(); width * slots],
            map: vec![NONE; slots],
            rc: vec![0; slots],
            free: (0..slots).rev().collect(),
        }
    }

    fn reset(&mut self) {
        let slots = self.rc.len();
        self.map.fill(NONE);
        self.rc.fill(0);
        self.free.clear();
        self.free.extend((0..slots).rev());
    }

    fn release(&mut self, path: usize) {
        let old = self.map[path];
        if old != NONE {
            self.rc[old] -= 1;
            if self.rc[old] == 0 {
                self.free.push(old);
            }
            self.map[path] = NONE;
        }
    }

    fn share(&mut self, path: usize, slot: usize) {
        self.rc[slot] += 1;
        self.release(path);
        self.map[path] = slot;
    }

    /// Slot `path` may overwrite.
    fn writable(&mut self, path: usize) -> usize {
        let old = self.map[path];
        if old != NONE && self.rc[old] == 1 {
            return old;
        }
        self.release(path);
        let slot = self.free.pop().expect("slot pool exhausted");
        self.rc[slot] = 1;
        self.map[path] = slot;
        slot
    }

    fn clone_path(&mut self, from: usize, to: usize) {
        debug_assert_eq!(self.map[to], NONE);
        let slot = self.map[from];
        if slot != NONE {
            self.rc[slot] += 1;
        }
        self.map[to] = slot;
    }

    fn slot(&self, path: usize) -> usize {
        self.map[path]
    }

    fn get(&self, slot: usize) -> &[T] {
        &self.data[slot * self.width..(slot + 1) * self.width]
    }

    fn get_mut(&mut self, slot: usize) -> &mut [T] {
        &mut self.data[slot * self.width..(slot + 1) * self.width]
    }
}

/// Reusable list decoder for one code and one partitioning.
#[derive(Debug, Clone)]
pub struct ListDecoder {
    spec: Arc<CodeSpec>,
    options: DecoderOptions,
    schedule: Arc<Schedule>,
    partitions: usize,
    max_list: usize,
    alpha: Vec<Pool<f64>>,
    beta: [Vec<Pool<u8>>; 2],
    active: Vec<usize>,
    pm: Vec<f64>,
    free_paths: Vec<usize>,
    scratch: NodeScratch,
    leaf_pms: Vec<f64>,
    leaf_slots: Vec<usize>,
    leaf_origins: Vec<usize>,
}

impl ListDecoder {
    /// `partitions` must be 1 or the code's CRC span count.
    pub fn new(
        spec: Arc<CodeSpec>,
        options: DecoderOptions,
        partitions: usize,
        max_list: usize,
    ) -> Result<Self, DecodeError> {
        if !max_list.is_power_of_two() || max_list > 64 {
            return Err(DecodeError::BadListSize { got: max_list, max: 64 });
        }
        if !(partitions == 1 || partitions == spec.partitions()) || !partitions.is_power_of_two() {
            return Err(DecodeError::BadPartitions { partitions });
        }
        let schedule = Arc::new(Schedule::build(
            spec.frozen_mask(),
            ScheduleOptions {
                fast: options.fast,
                partitions,
            },
        ));
        let m = spec.m();
        let alpha = (0..=m).map(|l| Pool::new(1 << l, max_list)).collect();
        let beta = [
            (0..=m).map(|l| Pool::new(1 << l, max_list)).collect(),
            (0..=m).map(|l| Pool::new(1 << l, max_list)).collect(),
        ];
        Ok(Self {
            spec,
            options,
            schedule,
            partitions,
            max_list,
            alpha,
            beta,
            active: Vec::with_capacity(max_list),
            pm: vec![0.0; max_list],
            free_paths: Vec::with_capacity(max_list),
            scratch: NodeScratch::default(),
            leaf_pms: Vec::with_capacity(max_list),
            leaf_slots: Vec::with_capacity(max_list),
            leaf_origins: Vec::with_capacity(max_list),
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn options(&self) -> &DecoderOptions {
        &self.options
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn max_list(&self) -> usize {
        self.max_list
    }

    fn kill(&mut self, path: usize) {
        for p in self.alpha.iter_mut() {
            p.release(path);
        }
        for side in self.beta.iter_mut() {
            for p in side.iter_mut() {
                p.release(path);
            }
        }
        self.free_paths.push(path);
    }

    fn clone_path(&mut self, from: usize) -> usize {
        let to = self.free_paths.pop().expect("path ids exhausted");
        for p in self.alpha.iter_mut() {
            p.clone_path(from, to);
        }
        for side in self.beta.iter_mut() {
            for p in side.iter_mut() {
                p.clone_path(from, to);
            }
        }
        self.pm[to] = self.pm[from];
        to
    }

    /// Decode with `list` paths. With `crossover = Some(s)` the list is cut
    /// to `s` paths at every partition boundary (CRC-passing first) and the
    /// best `s` paths are returned; otherwise all paths are returned.
    pub fn decode(
        &mut self,
        llrs: &[f64],
        list: usize,
        crossover: Option<usize>,
    ) -> Result<AttemptTrace, DecodeError> {
        let n = self.spec.n();
        let m = self.spec.m();
        if llrs.len() != n {
            return Err(DecodeError::LengthMismatch { expected: n, got: llrs.len() });
        }
        if !list.is_power_of_two() || list > self.max_list {
            return Err(DecodeError::BadListSize { got: list, max: self.max_list });
        }
        if let Some(s) = crossover {
            if s == 0 || s > list {
                return Err(DecodeError::BadCrossover { survivors: s, list });
            }
        }
        for p in self.alpha.iter_mut() {
            p.reset();
        }
        for side in self.beta.iter_mut() {
            for p in side.iter_mut() {
                p.reset();
            }
        }
        self.active.clear();
        self.free_paths.clear();
        self.free_paths.extend((1..self.max_list).rev());
        self.active.push(0);
        self.pm[0] = 0.0;
        let quant = self.options.quantization;
        let internal = quant.map(|q| q.internal_llr);
        let arith = PmArith {
            limit: quant.map(|q| q.path_metric),
        };
        {
            let root = self.alpha[m].writable(0);
            let dst = self.alpha[m].get_mut(root);
            match quant {
                Some(q) => {
                    for (d, &l) in dst.iter_mut().zip(llrs) {
                        *d = q.received_llr.quantize(l);
                    }
                }
                None => dst.copy_from_slice(llrs),
            }
        }
        let mut ops = OpCounter::default();
        let steps = Arc::clone(&self.schedule);
        let mut shared: Vec<(usize, usize, usize)> = Vec::with_capacity(self.max_list);
        for step in steps.steps() {
            match *step {
                Step::Left { level } => {
                    let half = 1 << (level - 1);
                    ops.charge(CostEvent::LeftTraversal { elements: half, paths: self.active.len() });
                    shared.clear();
                    for i in 0..self.active.len() {
                        let p = self.active[i];
                        let src_slot = self.alpha[level].slot(p);
                        if let Some(&(_, _, dst)) = shared.iter().find(|s| s.0 == src_slot) {
                            self.alpha[level - 1].share(p, dst);
                            continue;
                        }
                        let dst = self.alpha[level - 1].writable(p);
                        let (lo, hi) = self.alpha.split_at_mut(level);
                        let src = hi[0].get(src_slot);
                        let out = lo[level - 1].get_mut(dst);
                        let mode = self.options.soft_update;
                        let (a, b) = src.split_at(half);
                        match mode {
                            SoftUpdate::MinSum => {
                                for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                                    *o = minsum(x, y);
                                }
                            }
                            SoftUpdate::Exact => {
                                for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                                    *o = f_update(x, y, mode);
                                }
                            }
                        }
                        if let (Some(fmt), SoftUpdate::Exact) = (internal, mode) {
                            out.iter_mut().for_each(|v| *v = fmt.quantize(*v));
                        }
                        shared.push((src_slot, NONE, dst));
                    }
                }
                Step::Right { level } => {
                    let half = 1 << (level - 1);
                    ops.charge(CostEvent::RightTraversal { elements: half, paths: self.active.len() });
                    shared.clear();
                    for i in 0..self.active.len() {
                        let p = self.active[i];
                        let src_slot = self.alpha[level].slot(p);
                        let beta_slot = self.beta[0][level - 1].slot(p);
                        if let Some(&(_, _, dst)) =
                            shared.iter().find(|s| s.0 == src_slot && s.1 == beta_slot)
                        {
                            self.alpha[level - 1].share(p, dst);
                            continue;
                        }
                        let dst = self.alpha[level - 1].writable(p);
                        let (lo, hi) = self.alpha.split_at_mut(level);
                        let src = hi[0].get(src_slot);
                        let out = lo[level - 1].get_mut(dst);
                        let left = self.beta[0][level - 1].get(beta_slot);
                        let (a, b) = src.split_at(half);
                        for (((o, &x), &y), &ps) in out.iter_mut().zip(a).zip(b).zip(left) {
                            *o = g_update(x, y, ps);
                        }
                        if let Some(fmt) = internal {
                            out.iter_mut().for_each(|v| *v = fmt.saturate(*v));
                        }
                        shared.push((src_slot, beta_slot, dst));
                    }
                }
                Step::Combine { level, side } => {
                    let half = 1 << (level - 1);
                    shared.clear();
                    for i in 0..self.active.len() {
                        let p = self.active[i];
                        let l_slot = self.beta[0][level - 1].slot(p);
                        let r_slot = self.beta[1][level - 1].slot(p);
                        if let Some(&(_, _, dst)) =
                            shared.iter().find(|s| s.0 == l_slot && s.1 == r_slot)
                        {
                            self.beta[side][level].share(p, dst);
                            continue;
                        }
                        let dst = self.beta[side][level].writable(p);
                        let [b0, b1] = &mut self.beta;
                        let (left, right, out) = if side == 0 {
                            let (lo, hi) = b0.split_at_mut(level);
                            (lo[level - 1].get(l_slot), b1[level - 1].get(r_slot), hi[0].get_mut(dst))
                        } else {
                            let (lo, hi) = b1.split_at_mut(level);
                            (b0[level - 1].get(l_slot), lo[level - 1].get(r_slot), hi[0].get_mut(dst))
                        };
                        let (lo_out, hi_out) = out.split_at_mut(half);
                        for ((o, &l), &r) in lo_out.iter_mut().zip(left).zip(right) {
                            *o = l ^ r;
                        }
                        hi_out.copy_from_slice(right);
                        shared.push((l_slot, r_slot, dst));
                    }
                }
                Step::Leaf(node) => self.run_leaf(&node, list, arith, &mut ops),
                Step::Boundary { partition } => {
                    if let Some(s) = crossover {
                        self.cut_at_boundary(partition, s, &mut ops);
                    }
                }
            }
        }

        let last = self.partitions - 1;
        let mut paths: Vec<PathOutcome> = self
            .active
            .iter()
            .map(|&p| {
                let codeword = self.beta[0][m].get(self.beta[0][m].slot(p)).to_vec();
                let mut u_hat = codeword.clone();
                polar_transform(&mut u_hat);
                let crc_ok = if self.partitions == 1 {
                    self.spec.crc_ok(&u_hat)
                } else {
                    self.spec.partition_crc_ok(last, &u_hat)
                };
                PathOutcome {
                    pm: self.pm[p],
                    message: self.spec.extract_message(&u_hat),
                    codeword,
                    u_hat,
                    crc_ok,
                }
            })
            .collect();
        paths.sort_by(|a, b| b.crc_ok.cmp(&a.crc_ok).then(a.pm.total_cmp(&b.pm)));
        if let Some(s) = crossover {
            paths.truncate(s);
        }
        Ok(AttemptTrace {
            list_size: list,
            paths,
            ops,
        })
    }

    fn run_leaf(&mut self, node: &NodeClass, list: usize, arith: PmArith, ops: &mut OpCounter) {
        let level = node.level;
        let side = node.side();
        let origins = std::mem::take(&mut self.active);
        self.leaf_origins.clear();
        self.leaf_origins.extend_from_slice(&origins);
        let mut pms = std::mem::take(&mut self.leaf_pms);
        pms.clear();
        pms.extend(origins.iter().map(|&p| self.pm[p]));
        let mut alpha_slots = std::mem::take(&mut self.leaf_slots);
        alpha_slots.clear();
        alpha_slots.extend(origins.iter().map(|&p| self.alpha[level].slot(p)));
        let cands = {
            let pool = &self.alpha[level];
            let alphas: Vec<&[f64]> = alpha_slots.iter().map(|&s| pool.get(s)).collect();
            expand_node(node, &alphas, &pms, list, &self.options, arith, &mut self.scratch, ops)
        };

        let mut used = 0u64;
        for c in &cands {
            used |= 1 << c.origin;
        }
        for (i, &p) in origins.iter().enumerate() {
            if used & 1 << i == 0 {
                self.kill(p);
            }
        }
        let mut claimed = 0u64;
        let mut active = origins;
        active.clear();
        for c in &cands {
            let origin = self.leaf_origins[c.origin];
            let path = if claimed & 1 << c.origin != 0 {
                self.clone_path(origin)
            } else {
                claimed |= 1 << c.origin;
                origin
            };
            self.pm[path] = c.pm;
            let dst = self.beta[side][level].writable(path);
            let (order, parity) = match node.kind {
                NodeKind::Rate1 | NodeKind::Spc if node.len() > 1 => {
                    (self.scratch.order[c.origin].as_slice(), self.scratch.parity[c.origin])
                }
                _ => (&[][..], 0),
            };
            let alpha = self.alpha[level].get(alpha_slots[c.origin]);
            materialize(node.kind, alpha, c, order, parity, self.beta[side][level].get_mut(dst));
            active.push(path);
        }
        if arith.limit.is_some() {
            // Fixed-width metrics are kept relative to the best survivor.
            let min = active.iter().map(|&p| self.pm[p]).fold(f64::INFINITY, f64::min);
            for &p in &active {
                self.pm[p] -= min;
            }
        }
        self.active = active;
        self.scratch.cands = cands;
        self.leaf_pms = pms;
        self.leaf_slots = alpha_slots;
    }

    fn cut_at_boundary(&mut self, partition: usize, survivors: usize, ops: &mut OpCounter) {
        if self.active.len() <= survivors {
            return;
        }
        let n = self.spec.n();
        let part_len = n / self.partitions;
        let level = part_len.trailing_zeros() as usize;
        let side = partition & 1;
        let pool = &self.beta[side][level];
        let mut u = vec![0u8; n];
        let mut ranked: Vec<(bool, f64, usize)> = self
            .active
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let span = partition * part_len..(partition + 1) * part_len;
                u[span.clone()].copy_from_slice(pool.get(pool.slot(p)));
                polar_transform(&mut u[span]);
                (self.spec.partition_crc_ok(partition, &u), self.pm[p], i)
            })
            .collect();
        ops.charge(CostEvent::Sorter { metrics: ranked.len() });
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.total_cmp(&b.1)));
        let keep: Vec<usize> = ranked[..survivors].iter().map(|r| self.active[r.2]).collect();
        for &(_, _, i) in &ranked[survivors..] {
            let p = self.active[i];
            self.kill(p);
        }
        self.active = keep;
    }
}

/// Anything that turns channel LLRs into a ranked candidate list.
pub trait FrameDecoder {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<AttemptTrace, DecodeError>;

    /// List size the next frame will be decoded with.
    fn list_size(&self) -> usize;

    /// Change the list size for subsequent frames.
    fn set_list_size(&mut self, list: usize) -> Result<(), DecodeError>;
}

/// Plain SCL (or SC with `list = 1`) with a fixed list size.
#[derive(Debug, Clone)]
pub struct SclDecoder {
    inner: ListDecoder,
    list: usize,
}

impl SclDecoder {
    pub fn new(spec: Arc<CodeSpec>, list: usize, options: DecoderOptions) -> Result<Self, DecodeError> {
        let inner = ListDecoder::new(spec, options, 1, list)?;
        Ok(Self { inner, list })
    }

    /// Allocate for up to `max_list` paths.
    pub fn with_capacity(
        spec: Arc<CodeSpec>,
        list: usize,
        max_list: usize,
        options: DecoderOptions,
    ) -> Result<Self, DecodeError> {
        let inner = ListDecoder::new(spec, options, 1, max_list.max(list))?;
        Ok(Self { inner, list })
    }

    pub fn inner(&self) -> &ListDecoder {
        &self.inner
    }
}

impl FrameDecoder for SclDecoder {
    fn decode_frame(&mut self, llrs: &[f64]) -> Result<AttemptTrace, DecodeError> {
        self.inner.decode(llrs, self.list, None)
    }

    fn list_size(&self) -> usize {
        self.list
    }

    fn set_list_size(&mut self, list: usize) -> Result<(), DecodeError> {
        if !list.is_power_of_two() || list > self.inner.max_list() {
            return Err(DecodeError::BadListSize { got: list, max: self.inner.max_list() });
        }
        self.list = list;
        Ok(())
    }
}

/// One-shot SCL decode.
pub fn scl_decode(
    spec: &CodeSpec,
    llrs: &[f64],
    list: usize,
    options: DecoderOptions,
) -> Result<AttemptTrace, DecodeError> {
    let mut dec = ListDecoder::new(Arc::new(spec.clone()), options, 1, list.next_power_of_two())?;
    dec.decode(llrs, list, None)
}
