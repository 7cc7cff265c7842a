//! SC tree machinery: soft updates, partial-sum propagation, node
//! classification and the decoding schedule shared by all list decoders.
//!
//! Stages are 0-based here: stage 0 holds bit decisions and stage `m` the
//! channel, so the 1-based stage `i` of the recursions is `i - 1` below and
//! the butterfly distance at stage `s` is `2^s`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SoftUpdate {
    #[default]
    MinSum,
    /// Box-plus with `2 atanh(tanh(a/2) tanh(b/2))`.
    Exact,
}

#[inline]
pub fn f_update(a: f64, b: f64, mode: SoftUpdate) -> f64 {
    match mode {
        SoftUpdate::MinSum => minsum(a, b),
        SoftUpdate::Exact => boxplus(a, b),
    }
}

#[inline]
pub fn minsum(a: f64, b: f64) -> f64 {
    const SIGN: u64 = 1 << 63;
    let mag = a.abs().min(b.abs());
    f64::from_bits(mag.to_bits() | ((a.to_bits() ^ b.to_bits()) & SIGN))
}

/// Numerically stable box-plus.
fn boxplus(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let (x, y) = (a.abs(), b.abs());
    let mag = x.min(y) + (-(x + y)).exp().ln_1p() - (-(x - y).abs()).exp().ln_1p();
    sign * mag
}

#[inline]
pub fn g_update(a: f64, b: f64, partial_sum: u8) -> f64 {
    b + f64::from_bits(a.to_bits() ^ (u64::from(partial_sum & 1) << 63))
}

/// Per-stage LLRs and partial sums of a single SC decoder.
#[derive(Debug, Clone)]
pub struct StageBuffer {
    m: usize,
    pub llrs: Vec<Vec<f64>>,
    pub hard: Vec<Vec<u8>>,
}

impl StageBuffer {
    pub fn new(channel: &[f64]) -> Self {
        let n = channel.len();
        assert!(n.is_power_of_two(), "length must be a power of two");
        let m = n.trailing_zeros() as usize;
        let mut llrs = vec![vec![0.0; n]; m + 1];
        llrs[m].copy_from_slice(channel);
        Self {
            m,
            llrs,
            hard: vec![vec![0; n]; m + 1],
        }
    }

    /// Soft update of stage `s` for the `2^s` positions sharing `block`'s
    /// bits at and above `s`.
    pub fn update_soft(&mut self, s: usize, block: usize, mode: SoftUpdate) {
        let xi = 1usize << s;
        let start = block & !(xi - 1);
        let (lower, upper) = self.llrs.split_at_mut(s + 1);
        let dst = &mut lower[s];
        let src = &upper[0];
        for j in start..start + xi {
            dst[j] = if (j / xi) % 2 == 0 {
                f_update(src[j], src[j + xi], mode)
            } else {
                g_update(src[j - xi], src[j], self.hard[s][j - xi])
            };
        }
    }

    /// Partial sums of stage `s + 1` for the block of `2^(s+1)` positions
    /// containing `block`.
    pub fn propagate_hard(&mut self, s: usize, block: usize) {
        let xi = 1usize << s;
        let start = block & !(2 * xi - 1);
        let (lower, upper) = self.hard.split_at_mut(s + 1);
        let src = &lower[s];
        let dst = &mut upper[0];
        for j in start..start + 2 * xi {
            dst[j] = if (j / xi) % 2 == 0 {
                src[j] ^ src[j + xi]
            } else {
                src[j]
            };
        }
    }

    pub fn stages(&self) -> usize {
        self.m
    }
}

/// Apply the partial-sum recursion from stage 0 to the top.
pub fn propagate_all(u: &[u8]) -> Vec<u8> {
    let mut buf = StageBuffer {
        m: u.len().trailing_zeros() as usize,
        llrs: Vec::new(),
        hard: vec![vec![0; u.len()]; u.len().trailing_zeros() as usize + 1],
    };
    buf.hard[0].copy_from_slice(u);
    for s in 0..buf.m {
        let width = 2usize << s;
        for block in (0..u.len()).step_by(width) {
            buf.propagate_hard(s, block);
        }
    }
    buf.hard[buf.m].clone()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScOutput {
    pub u_hat: Vec<u8>,
    pub codeword: Vec<u8>,
}

/// Bit-by-bit SC decoding straight from the stage recursions. Used as the
/// reference against which the list decoders are checked.
pub fn sc_decode(llrs: &[f64], frozen: &[bool], mode: SoftUpdate) -> ScOutput {
    let n = llrs.len();
    assert_eq!(frozen.len(), n);
    let mut buf = StageBuffer::new(llrs);
    let m = buf.m;
    for phi in 0..n {
        for s in (0..m).rev() {
            if phi % (1 << s) == 0 {
                buf.update_soft(s, phi, mode);
            }
        }
        let bit = if frozen[phi] {
            0
        } else {
            u8::from(buf.llrs[0][phi] < 0.0)
        };
        buf.hard[0][phi] = bit;
        for s in 0..m {
            if (phi + 1) % (2 << s) == 0 {
                buf.propagate_hard(s, phi);
            } else {
                break;
            }
        }
    }
    ScOutput {
        u_hat: buf.hard[0].clone(),
        codeword: buf.hard[m].clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Rate0,
    Rate1,
    Repetition,
    Spc,
    Generic,
}

/// A subtree of `2^level` leaves starting at u-index `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeClass {
    pub kind: NodeKind,
    pub level: usize,
    pub offset: usize,
}

impl NodeClass {
    pub fn len(&self) -> usize {
        1 << self.level
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 0 for a left child (or the root), 1 for a right child.
    pub fn side(&self) -> usize {
        (self.offset >> self.level) & 1
    }

    pub fn has_info(&self) -> bool {
        self.kind != NodeKind::Rate0
    }
}

/// Classify a frozen pattern; `Generic` if no special rule applies.
pub fn node_kind(frozen: &[bool]) -> NodeKind {
    let n = frozen.len();
    let info = frozen.iter().filter(|f| !**f).count();
    if info == 0 {
        NodeKind::Rate0
    } else if info == n {
        NodeKind::Rate1
    } else if info == 1 && !frozen[n - 1] {
        NodeKind::Repetition
    } else if info == n - 1 && frozen[0] {
        NodeKind::Spc
    } else {
        NodeKind::Generic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    /// f-update from the node at `level` into its left child.
    Left { level: usize },
    /// g-update from the node at `level` into its right child.
    Right { level: usize },
    /// Merge both children of the node at `level` into its partial sums.
    Combine { level: usize, side: usize },
    Leaf(NodeClass),
    /// All leaves of partition `partition` have been decided.
    Boundary { partition: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleOptions {
    /// Use special nodes; otherwise every leaf is a single bit.
    pub fast: bool,
    /// Number of equal partitions (power of two); special nodes never
    /// span a partition border.
    pub partitions: usize,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            fast: true,
            partitions: 1,
        }
    }
}

/// Depth-first decoding program for one frozen pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    n: usize,
    steps: Vec<Step>,
}

impl Schedule {
    pub fn build(frozen: &[bool], opts: ScheduleOptions) -> Self {
        let n = frozen.len();
        assert!(n.is_power_of_two() && n >= 2);
        assert!(opts.partitions.is_power_of_two() && opts.partitions <= n);
        let m = n.trailing_zeros() as usize;
        let partition_level = m - opts.partitions.trailing_zeros() as usize;
        let mut steps = Vec::new();
        emit(frozen, m, 0, &opts, partition_level, &mut steps);
        Self { n, steps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn leaves(&self) -> impl Iterator<Item = &NodeClass> {
        self.steps.iter().filter_map(|s| match s {
            Step::Leaf(node) => Some(node),
            _ => None,
        })
    }
}

fn emit(
    frozen: &[bool],
    level: usize,
    offset: usize,
    opts: &ScheduleOptions,
    partition_level: usize,
    out: &mut Vec<Step>,
) {
    let len = 1usize << level;
    let pattern = &frozen[offset..offset + len];
    let kind = if level > partition_level {
        NodeKind::Generic
    } else if !opts.fast {
        match (level, pattern[0]) {
            (0, true) => NodeKind::Rate0,
            (0, false) => NodeKind::Rate1,
            _ => NodeKind::Generic,
        }
    } else {
        node_kind(pattern)
    };
    if kind == NodeKind::Generic {
        out.push(Step::Left { level });
        emit(frozen, level - 1, offset, opts, partition_level, out);
        out.push(Step::Right { level });
        emit(frozen, level - 1, offset + len / 2, opts, partition_level, out);
        out.push(Step::Combine {
            level,
            side: (offset >> level) & 1,
        });
    } else {
        out.push(Step::Leaf(NodeClass {
            kind,
            level,
            offset,
        }));
    }
    if level == partition_level {
        let partition = offset >> level;
        if partition + 1 < opts.partitions {
            out.push(Step::Boundary { partition });
        }
    }
}

/// Greedy top-down special-node cover of the leaves.
pub fn classify_tree(frozen: &[bool]) -> Vec<NodeClass> {
    Schedule::build(frozen, ScheduleOptions::default())
        .leaves()
        .copied()
        .collect()
}
