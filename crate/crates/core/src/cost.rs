//! Operation counting and the clock-cycle latency model.
//!
//! Charging rules (per active path unless noted):
//! - left traversal: one comparison per output element (min-sum);
//! - right traversal: one addition per output element;
//! - single-bit leaf: one addition;
//! - rate-0 / repetition node: one addition per node element;
//! - rate-1 enumeration step: one addition;
//! - SPC node: one addition to initialise the PM, two per enumeration step;
//! - sorter over `L_s` metrics: `L_s (L_s - 1)` comparisons and `L_s`
//!   selections;
//! - bias enhancement: `n` additions;
//! - IDA decision: `n + 1` comparisons and `n - 1` additions.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sc_kernel::{NodeKind, Schedule, Step};

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("candidate decoder performed no operations")]
    ZeroOps,
    #[error("unknown cost event {0:?}")]
    UnknownEvent(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounter {
    pub additions: u64,
    pub comparisons: u64,
    pub selections: u64,
}

impl OpCounter {
    pub fn total(&self) -> u64 {
        self.additions + self.comparisons + self.selections
    }

    pub fn charge(&mut self, event: CostEvent) {
        match event {
            CostEvent::LeftTraversal { elements, paths } => {
                self.comparisons += elements as u64 * paths as u64
            }
            CostEvent::RightTraversal { elements, paths } => {
                self.additions += elements as u64 * paths as u64
            }
            CostEvent::PmUpdate { additions } => self.additions += additions as u64,
            CostEvent::Sorter { metrics } => {
                let l = metrics as u64;
                self.comparisons += l * l.saturating_sub(1);
                self.selections += l;
            }
            CostEvent::Bias { n } => self.additions += n as u64,
            CostEvent::Ida { n } => {
                self.comparisons += n as u64 + 1;
                self.additions += n.saturating_sub(1) as u64;
            }
        }
    }
}

impl Add for OpCounter {
    type Output = OpCounter;

    fn add(self, rhs: Self) -> Self {
        Self {
            additions: self.additions + rhs.additions,
            comparisons: self.comparisons + rhs.comparisons,
            selections: self.selections + rhs.selections,
        }
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostEvent {
    LeftTraversal { elements: usize, paths: usize },
    RightTraversal { elements: usize, paths: usize },
    PmUpdate { additions: usize },
    Sorter { metrics: usize },
    Bias { n: usize },
    Ida { n: usize },
}

impl std::str::FromStr for CostEvent {
    type Err = CostError;

    /// `kind:value[:paths]`, e.g. `sorter:16`, `left:64:8`, `ida:4096`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || CostError::UnknownEvent(s.to_string());
        let mut it = s.split(':');
        let kind = it.next().ok_or_else(unknown)?;
        let value: usize = it
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(unknown)?;
        let paths: usize = match it.next() {
            Some(p) => p.parse().map_err(|_| unknown())?,
            None => 1,
        };
        Ok(match kind {
            "left" => CostEvent::LeftTraversal {
                elements: value,
                paths,
            },
            "right" => CostEvent::RightTraversal {
                elements: value,
                paths,
            },
            "pm" => CostEvent::PmUpdate { additions: value },
            "sorter" => CostEvent::Sorter { metrics: value },
            "bias" => CostEvent::Bias { n: value },
            "ida" => CostEvent::Ida { n: value },
            _ => return Err(unknown()),
        })
    }
}

/// Charge a textual event; unknown events are rejected.
pub fn charge_ops(event: &str, counter: &mut OpCounter) -> Result<(), CostError> {
    counter.charge(event.parse()?);
    Ok(())
}

/// `total(baseline) / total(candidate)`.
pub fn complexity_ratio(baseline: &OpCounter, candidate: &OpCounter) -> Result<f64, CostError> {
    if candidate.total() == 0 {
        return Err(CostError::ZeroOps);
    }
    Ok(baseline.total() as f64 / candidate.total() as f64)
}

/// Cycle costs per schedule element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyModel {
    pub list_size: usize,
    pub traversal: u64,
    pub rate0: u64,
    pub repetition: u64,
    pub bit_leaf: u64,
}

impl LatencyModel {
    pub fn new(list_size: usize) -> Self {
        Self {
            list_size: list_size.max(1),
            traversal: 1,
            rate0: 1,
            repetition: 1,
            bit_leaf: 1,
        }
    }

    pub fn node_cycles(&self, kind: NodeKind, len: usize) -> u64 {
        let l = self.list_size;
        let cycles = match kind {
            _ if len == 1 => self.bit_leaf,
            NodeKind::Rate0 => self.rate0,
            NodeKind::Repetition => self.repetition,
            NodeKind::Rate1 => (l - 1).min(len) as u64,
            NodeKind::Spc => l.min(len) as u64,
            NodeKind::Generic => self.bit_leaf,
        };
        cycles.max(1)
    }

    /// One cycle for LLR comparison, `log2 n` for the adder tree, one for
    /// the threshold comparison.
    pub fn ida_cycles(n: usize) -> u64 {
        2 + n.trailing_zeros() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyReport {
    /// Whole decode.
    pub total_cycles: u64,
    /// Cycles spent before the first node carrying an information bit.
    pub before_first_info: u64,
    pub ida_cycles: u64,
    /// Extra cycles when IDA runs alongside the frozen prefix.
    pub ida_overhead: u64,
}

pub fn latency_cycles(schedule: &Schedule, model: &LatencyModel, with_ida: bool) -> LatencyReport {
    let mut total = 0u64;
    let mut before_first_info = None;
    for step in schedule.steps() {
        match step {
            Step::Left { .. } | Step::Right { .. } | Step::Combine { .. } => {
                total += model.traversal
            }
            Step::Leaf(node) => {
                if node.has_info() && before_first_info.is_none() {
                    before_first_info = Some(total);
                }
                total += model.node_cycles(node.kind, node.len());
            }
            Step::Boundary { .. } => {}
        }
    }
    let delta = before_first_info.unwrap_or(total);
    let ida = LatencyModel::ida_cycles(schedule.n());
    let overhead = if with_ida { ida.saturating_sub(delta) } else { 0 };
    LatencyReport {
        total_cycles: total + overhead,
        before_first_info: delta,
        ida_cycles: ida,
        ida_overhead: overhead,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sc_kernel::ScheduleOptions;

    #[test]
    fn event_rules() {
        let mut c = OpCounter::default();
        charge_ops("sorter:16", &mut c).unwrap();
        assert_eq!(c.total(), 256);
        let mut c = OpCounter::default();
        charge_ops("bias:4096", &mut c).unwrap();
        assert_eq!(c.additions, 4096);
        let mut c = OpCounter::default();
        charge_ops("ida:4096", &mut c).unwrap();
        assert_eq!((c.comparisons, c.additions), (4097, 4095));
        let mut c = OpCounter::default();
        charge_ops("left:64:8", &mut c).unwrap();
        assert_eq!(c.comparisons, 512);
        assert!(charge_ops("teleport:3", &mut c).is_err());
    }

    #[test]
    fn ratio() {
        let c = OpCounter {
            additions: 3,
            comparisons: 4,
            selections: 1,
        };
        assert_eq!(complexity_ratio(&c, &c).unwrap(), 1.0);
        assert_eq!(
            complexity_ratio(&c, &OpCounter::default()),
            Err(CostError::ZeroOps)
        );
        assert_eq!((c + c).total(), 16);
    }

    #[test]
    fn ida_latency() {
        assert_eq!(LatencyModel::ida_cycles(4096), 14);
        assert_eq!(LatencyModel::ida_cycles(8192), 15);
        for m in 1..14 {
            assert_eq!(LatencyModel::ida_cycles(1 << m), 2 + m as u64);
        }
    }

    #[test]
    fn overhead_only_when_prefix_is_short() {
        // 8 frozen bits then 8 info bits: rate-0 left half, rate-1 right half.
        let frozen: Vec<bool> = (0..16).map(|i| i < 8).collect();
        let sched = Schedule::build(&frozen, ScheduleOptions::default());
        let model = LatencyModel::new(8);
        let r = latency_cycles(&sched, &model, true);
        // Left, rate-0, Right -> 3 cycles before the rate-1 node.
        assert_eq!(r.before_first_info, 3);
        assert_eq!(r.ida_cycles, 6);
        assert_eq!(r.ida_overhead, 3);
        let r2 = latency_cycles(&sched, &model, false);
        assert_eq!(r2.ida_overhead, 0);
        assert_eq!(r.total_cycles, r2.total_cycles + 3);
    }
}
