//! Construction of CRC-aided polar codes.
//!
//! Reliability ordering uses the beta-expansion weight with `beta = 2^(1/4)`,
//! the information set is the `k` most reliable synthetic channels, and
//! CRC bits sit on the last information positions of the span they protect.
//! Encoding is the plain (non-systematic) Kronecker transform.

use std::fmt::Write as _;
use std::ops::Range;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CodeError {
    #[error("code length {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),
    #[error("message of {message} bits plus {crc} CRC bits exceeds code length {n}")]
    TooManyBits { message: usize, crc: usize, n: usize },
    #[error("CRC span {span:?} holds {info} information positions, fewer than its {crc} CRC bits")]
    CrcCapacity {
        span: Range<usize>,
        info: usize,
        crc: usize,
    },
    #[error("CRC spans must tile [0, {0}) in ascending order")]
    BadLayout(usize),
    #[error("invalid CRC polynomial: degree {degree}, coefficients {coefficients:#x}")]
    BadPolynomial { degree: u32, coefficients: u64 },
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("malformed code description: {0}")]
    Parse(String),
}

/// Generator polynomial without its leading `x^degree` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CrcPolynomial {
    degree: u32,
    coefficients: u64,
}

impl CrcPolynomial {
    /// CRC-16 with polynomial 0x1021.
    pub const CRC16: CrcPolynomial = CrcPolynomial {
        degree: 16,
        coefficients: 0x1021,
    };
    /// CRC-6 with polynomial 0x21, used on the first partition.
    pub const CRC6: CrcPolynomial = CrcPolynomial {
        degree: 6,
        coefficients: 0x21,
    };
    /// CRC-10 with polynomial 0x233, used on the second partition.
    pub const CRC10: CrcPolynomial = CrcPolynomial {
        degree: 10,
        coefficients: 0x233,
    };

    pub fn new(degree: u32, coefficients: u64) -> Result<Self, CodeError> {
        let fits = degree >= 64 || coefficients >> degree == 0;
        if degree == 0 || degree > 63 || !fits {
            return Err(CodeError::BadPolynomial {
                degree,
                coefficients,
            });
        }
        Ok(Self {
            degree,
            coefficients,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    pub fn coefficients(&self) -> u64 {
        self.coefficients
    }
}

/// Remainder of `bits * x^degree` modulo the polynomial; zero initial
/// register, no reflection, most significant bit first.
pub fn crc_compute(bits: &[u8], poly: CrcPolynomial) -> Vec<u8> {
    let degree = poly.degree;
    let top = 1u64 << (degree - 1);
    let mask = if degree == 64 {
        u64::MAX
    } else {
        (1u64 << degree) - 1
    };
    let mut reg = 0u64;
    for &b in bits {
        let feedback = ((reg & top) != 0) ^ (b & 1 == 1);
        reg = (reg << 1) & mask;
        if feedback {
            reg ^= poly.coefficients;
        }
    }
    (0..degree)
        .rev()
        .map(|i| ((reg >> i) & 1) as u8)
        .collect()
}

/// True when the trailing `degree` bits are the CRC of the leading bits.
pub fn crc_verify(bits_with_crc: &[u8], poly: CrcPolynomial) -> bool {
    let d = poly.degree();
    if bits_with_crc.len() < d {
        return false;
    }
    let (msg, crc) = bits_with_crc.split_at(bits_with_crc.len() - d);
    crc_compute(msg, poly) == crc
}

/// One CRC-protected span of u-vector indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrcSegment {
    pub span: Range<usize>,
    pub poly: Option<CrcPolynomial>,
}

impl CrcSegment {
    pub fn crc_len(&self) -> usize {
        self.poly.map_or(0, |p| p.degree())
    }
}

/// A single CRC over the whole code.
pub fn single_crc_layout(n: usize, poly: CrcPolynomial) -> Vec<CrcSegment> {
    vec![CrcSegment {
        span: 0..n,
        poly: Some(poly),
    }]
}

/// No CRC at all.
pub fn no_crc_layout(n: usize) -> Vec<CrcSegment> {
    vec![CrcSegment {
        span: 0..n,
        poly: None,
    }]
}

/// Equal-size partitions in natural index order, one CRC each.
pub fn partitioned_crc_layout(n: usize, polys: &[CrcPolynomial]) -> Vec<CrcSegment> {
    let parts = polys.len().max(1);
    let width = n / parts;
    polys
        .iter()
        .enumerate()
        .map(|(p, &poly)| CrcSegment {
            span: p * width..(p + 1) * width,
            poly: Some(poly),
        })
        .collect()
}

/// Reliability weight of every synthetic channel; larger is more reliable.
pub fn beta_expansion_weights(n: usize) -> Result<Vec<f64>, CodeError> {
    if n < 2 || !n.is_power_of_two() {
        return Err(CodeError::NotPowerOfTwo(n));
    }
    let beta = 2f64.powf(0.25);
    let m = n.trailing_zeros();
    let powers: Vec<f64> = (0..m).map(|j| beta.powi(j as i32)).collect();
    Ok((0..n)
        .map(|i| {
            powers
                .iter()
                .enumerate()
                .filter(|(j, _)| (i >> j) & 1 == 1)
                .map(|(_, p)| p)
                .sum()
        })
        .collect())
}

/// Channel indices from least to most reliable. Equal weights rank the
/// higher index as more reliable.
pub fn reliability_order(n: usize) -> Result<Vec<usize>, CodeError> {
    let w = beta_expansion_weights(n)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)));
    Ok(idx)
}

#[derive(Debug, Clone, PartialEq)]
struct SegmentLayout {
    segment: CrcSegment,
    /// Information positions inside the span, ascending.
    info: Vec<usize>,
    /// Leading `message_len` entries of `info` carry message bits.
    message_len: usize,
}

/// Immutable description of one CRC-aided polar code.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    n: usize,
    m: usize,
    k: usize,
    info_set: Vec<usize>,
    frozen_set: Vec<usize>,
    frozen_mask: Vec<bool>,
    segments: Vec<SegmentLayout>,
}

/// Build a code with the `message_bits + crc` most reliable channels as
/// information set.
pub fn build_code_spec(
    n: usize,
    message_bits: usize,
    crc_layout: &[CrcSegment],
) -> Result<CodeSpec, CodeError> {
    let order = reliability_order(n)?;
    let layout = normalize_layout(n, crc_layout)?;
    let crc: usize = layout.iter().map(CrcSegment::crc_len).sum();
    if message_bits + crc > n {
        return Err(CodeError::TooManyBits {
            message: message_bits,
            crc,
            n,
        });
    }
    let k = message_bits + crc;
    let mut info: Vec<usize> = order[n - k..].to_vec();
    info.sort_unstable();
    CodeSpec::from_info_set(n, info, &layout)
}

fn normalize_layout(n: usize, layout: &[CrcSegment]) -> Result<Vec<CrcSegment>, CodeError> {
    if layout.is_empty() {
        return Ok(no_crc_layout(n));
    }
    let mut next = 0;
    for seg in layout {
        if seg.span.start != next || seg.span.end <= seg.span.start {
            return Err(CodeError::BadLayout(n));
        }
        next = seg.span.end;
    }
    if next != n {
        return Err(CodeError::BadLayout(n));
    }
    Ok(layout.to_vec())
}

impl CodeSpec {
    /// Code with an explicit information set (ascending or not).
    pub fn from_info_set(
        n: usize,
        mut info_set: Vec<usize>,
        crc_layout: &[CrcSegment],
    ) -> Result<Self, CodeError> {
        if n < 2 || !n.is_power_of_two() {
            return Err(CodeError::NotPowerOfTwo(n));
        }
        let layout = normalize_layout(n, crc_layout)?;
        info_set.sort_unstable();
        info_set.dedup();
        if info_set.last().is_some_and(|&i| i >= n) {
            return Err(CodeError::Parse("information index out of range".into()));
        }
        let mut frozen_mask = vec![true; n];
        for &i in &info_set {
            frozen_mask[i] = false;
        }
        let frozen_set = (0..n).filter(|&i| frozen_mask[i]).collect();
        let mut segments = Vec::with_capacity(layout.len());
        for seg in layout {
            let info: Vec<usize> = info_set
                .iter()
                .copied()
                .filter(|i| seg.span.contains(i))
                .collect();
            let crc = seg.crc_len();
            if info.len() < crc {
                return Err(CodeError::CrcCapacity {
                    span: seg.span.clone(),
                    info: info.len(),
                    crc,
                });
            }
            segments.push(SegmentLayout {
                message_len: info.len() - crc,
                info,
                segment: seg,
            });
        }
        Ok(Self {
            n,
            m: n.trailing_zeros() as usize,
            k: info_set.len(),
            info_set,
            frozen_set,
            frozen_mask,
            segments,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Information positions, CRC bits included.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn total_crc_bits(&self) -> usize {
        self.segments.iter().map(|s| s.segment.crc_len()).sum()
    }

    pub fn message_len(&self) -> usize {
        self.k - self.total_crc_bits()
    }

    pub fn effective_rate(&self) -> f64 {
        self.message_len() as f64 / self.n as f64
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen_set
    }

    /// `true` at frozen positions.
    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    pub fn crc_layout(&self) -> Vec<CrcSegment> {
        self.segments.iter().map(|s| s.segment.clone()).collect()
    }

    pub fn partitions(&self) -> usize {
        self.segments.len()
    }

    pub fn partition_span(&self, p: usize) -> Range<usize> {
        self.segments[p].segment.span.clone()
    }

    /// Build the u-vector: per span, message bits then CRC on the info
    /// positions in ascending order, zeros elsewhere.
    pub fn assemble_u(&self, message: &[u8]) -> Result<Vec<u8>, CodeError> {
        if message.len() != self.message_len() {
            return Err(CodeError::LengthMismatch {
                expected: self.message_len(),
                got: message.len(),
            });
        }
        let mut u = vec![0u8; self.n];
        let mut offset = 0;
        for seg in &self.segments {
            let chunk = &message[offset..offset + seg.message_len];
            offset += seg.message_len;
            let crc = seg
                .segment
                .poly
                .map(|p| crc_compute(chunk, p))
                .unwrap_or_default();
            for (&pos, &bit) in seg.info.iter().zip(chunk.iter().chain(crc.iter())) {
                u[pos] = bit;
            }
        }
        Ok(u)
    }

    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>, CodeError> {
        let mut u = self.assemble_u(message)?;
        polar_transform(&mut u);
        Ok(u)
    }

    /// Message bits carried by a u-vector.
    pub fn extract_message(&self, u: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.message_len());
        for seg in &self.segments {
            out.extend(seg.info[..seg.message_len].iter().map(|&i| u[i]));
        }
        out
    }

    /// CRC verdict of partition `p` for a u-vector. Spans without CRC pass.
    pub fn partition_crc_ok(&self, p: usize, u: &[u8]) -> bool {
        let seg = &self.segments[p];
        match seg.segment.poly {
            None => true,
            Some(poly) => {
                let bits: Vec<u8> = seg.info.iter().map(|&i| u[i]).collect();
                crc_verify(&bits, poly)
            }
        }
    }

    pub fn crc_ok(&self, u: &[u8]) -> bool {
        (0..self.segments.len()).all(|p| self.partition_crc_ok(p, u))
    }

    /// Plain-text key/value description used for regression fixtures.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "rate = {}", self.effective_rate());
        for seg in &self.segments {
            match seg.segment.poly {
                Some(p) => {
                    let _ = writeln!(
                        s,
                        "crc = {}..{} {} {:#x}",
                        seg.segment.span.start,
                        seg.segment.span.end,
                        p.degree,
                        p.coefficients
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        "crc = {}..{} none",
                        seg.segment.span.start, seg.segment.span.end
                    );
                }
            }
        }
        let bitmap: String = self
            .frozen_mask
            .iter()
            .map(|&f| if f { '1' } else { '0' })
            .collect();
        let _ = writeln!(s, "frozen = {bitmap}");
        s
    }

    pub fn from_text(text: &str) -> Result<Self, CodeError> {
        let bad = |msg: &str| CodeError::Parse(msg.to_string());
        let mut n = None;
        let mut k = None;
        let mut layout = Vec::new();
        let mut frozen = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| bad(line))?;
            let value = value.trim();
            match key.trim() {
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad("n"))?),
                "k" => k = Some(value.parse::<usize>().map_err(|_| bad("k"))?),
                "rate" => {}
                "crc" => layout.push(parse_segment(value)?),
                "frozen" => frozen = Some(value.to_string()),
                other => return Err(bad(&format!("unknown key {other}"))),
            }
        }
        let n = n.ok_or_else(|| bad("missing n"))?;
        let frozen = frozen.ok_or_else(|| bad("missing frozen bitmap"))?;
        if frozen.len() != n {
            return Err(bad("frozen bitmap length"));
        }
        let mut info = Vec::new();
        for (i, c) in frozen.chars().enumerate() {
            match c {
                '0' => info.push(i),
                '1' => {}
                _ => return Err(bad("frozen bitmap character")),
            }
        }
        if k.is_some_and(|k| k != info.len()) {
            return Err(bad("k disagrees with frozen bitmap"));
        }
        Self::from_info_set(n, info, &layout)
    }
}

fn parse_segment(value: &str) -> Result<CrcSegment, CodeError> {
    let bad = || CodeError::Parse(format!("crc entry {value:?}"));
    let mut parts = value.split_whitespace();
    let span = parts.next().ok_or_else(bad)?;
    let (a, b) = span.split_once("..").ok_or_else(bad)?;
    let span = a.parse().map_err(|_| bad())?..b.parse().map_err(|_| bad())?;
    let degree = parts.next().ok_or_else(bad)?;
    if degree == "none" {
        return Ok(CrcSegment { span, poly: None });
    }
    let degree: u32 = degree.parse().map_err(|_| bad())?;
    let coeff = parts.next().ok_or_else(bad)?;
    let coeff = u64::from_str_radix(coeff.trim_start_matches("0x"), 16).map_err(|_| bad())?;
    Ok(CrcSegment {
        span,
        poly: Some(CrcPolynomial::new(degree, coeff)?),
    })
}

/// In-place `x = x * F^{(x)m}` over GF(2), natural index order.
pub fn polar_transform(x: &mut [u8]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in x.chunks_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            for (l, r) in a.iter_mut().zip(b.iter()) {
                *l ^= *r;
            }
        }
        half *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent bit-array polynomial long division.
    fn long_division_crc(msg: &[u8], degree: usize, coeff: u64) -> Vec<u8> {
        let mut gen = vec![1u8];
        gen.extend((0..degree).rev().map(|i| ((coeff >> i) & 1) as u8));
        let mut work: Vec<u8> = msg.to_vec();
        work.extend(std::iter::repeat_n(0, degree));
        for i in 0..msg.len() {
            if work[i] == 1 {
                for (j, &g) in gen.iter().enumerate() {
                    work[i + j] ^= g;
                }
            }
        }
        work[msg.len()..].to_vec()
    }

    fn bits_of(bytes: &[u8]) -> Vec<u8> {
        bytes
            .iter()
            .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1))
            .collect()
    }

    fn to_u64(bits: &[u8]) -> u64 {
        bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    #[test]
    fn weights_small_lengths() {
        assert_eq!(beta_expansion_weights(2).unwrap(), vec![0.0, 1.0]);
        let w = beta_expansion_weights(4).unwrap();
        let expect = [0.0, 1.0, 1.189_207, 2.189_207];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-5);
        }
        assert_eq!(reliability_order(8).unwrap(), vec![0, 1, 2, 4, 3, 5, 6, 7]);
        assert!(matches!(
            beta_expansion_weights(12),
            Err(CodeError::NotPowerOfTwo(12))
        ));
        assert!(beta_expansion_weights(1).is_err());
    }

    #[test]
    fn crc_vectors() {
        assert_eq!(to_u64(&crc_compute(&[0; 16], CrcPolynomial::CRC16)), 0);
        let msg = bits_of(b"123456789");
        let crc = crc_compute(&msg, CrcPolynomial::CRC16);
        assert_eq!(crc, long_division_crc(&msg, 16, 0x1021));
        assert_eq!(to_u64(&crc), 0x31c3);
        for poly in [CrcPolynomial::CRC6, CrcPolynomial::CRC10] {
            let c = crc_compute(&msg, poly);
            assert_eq!(c, long_division_crc(&msg, poly.degree(), poly.coefficients()));
            let mut framed = msg.clone();
            framed.extend(c);
            assert!(crc_verify(&framed, poly));
        }
    }

    #[test]
    fn crc_catches_every_single_bit_error() {
        for poly in [CrcPolynomial::CRC6, CrcPolynomial::CRC10, CrcPolynomial::CRC16] {
            for len in 1..=64usize {
                let msg: Vec<u8> = (0..len).map(|i| ((i * 7 + len) % 3 == 0) as u8).collect();
                let mut framed = msg.clone();
                framed.extend(crc_compute(&msg, poly));
                for e in 0..framed.len() {
                    framed[e] ^= 1;
                    assert!(!crc_verify(&framed, poly), "{poly:?} len {len} pos {e}");
                    framed[e] ^= 1;
                }
            }
        }
    }

    #[test]
    fn polynomial_validation() {
        assert!(CrcPolynomial::new(6, 0x21).is_ok());
        assert!(CrcPolynomial::new(6, 0x41).is_err());
        assert!(CrcPolynomial::new(0, 0).is_err());
    }

    #[test]
    fn small_code_construction() {
        let parity = CrcPolynomial::new(1, 1).unwrap();
        let spec = build_code_spec(8, 3, &single_crc_layout(8, parity)).unwrap();
        assert_eq!(spec.k(), 4);
        assert_eq!(spec.info_set(), &[3, 5, 6, 7]);
        assert_eq!(spec.frozen_set(), &[0, 1, 2, 4]);
        let spec = build_code_spec(1024, 256, &single_crc_layout(1024, CrcPolynomial::CRC16)).unwrap();
        assert_eq!(spec.k(), 272);
        assert_eq!(spec.effective_rate(), 0.25);
    }

    #[test]
    fn partitioned_layout() {
        let layout = partitioned_crc_layout(4096, &[CrcPolynomial::CRC6, CrcPolynomial::CRC10]);
        let spec = build_code_spec(4096, 2048, &layout).unwrap();
        assert_eq!(spec.total_crc_bits(), 16);
        assert_eq!(spec.partition_span(0), 0..2048);
        assert_eq!(spec.partition_span(1), 2048..4096);
        let msg: Vec<u8> = (0..2048).map(|i| (i % 5 == 1) as u8).collect();
        let u = spec.assemble_u(&msg).unwrap();
        assert!(spec.crc_ok(&u));
        let mut bad = u.clone();
        let last_first_half = *spec.info_set().iter().rfind(|&&i| i < 2048).unwrap();
        bad[last_first_half] ^= 1;
        assert!(!spec.partition_crc_ok(0, &bad));
        assert!(spec.partition_crc_ok(1, &bad));
        assert_eq!(spec.extract_message(&u), msg);
    }

    #[test]
    fn crc_capacity_guard() {
        let layout = partitioned_crc_layout(16, &[CrcPolynomial::CRC6, CrcPolynomial::CRC6]);
        // Few info bits end up in the first half of a 16-bit code.
        let err = build_code_spec(16, 0, &layout).unwrap_err();
        assert!(matches!(err, CodeError::CrcCapacity { .. }));
    }

    #[test]
    fn length_checks() {
        let spec = build_code_spec(16, 4, &[]).unwrap();
        assert!(matches!(
            spec.encode(&[0, 1]),
            Err(CodeError::LengthMismatch { expected: 4, got: 2 })
        ));
        assert!(build_code_spec(16, 17, &[]).is_err());
    }

    #[test]
    fn kronecker_rows() {
        let mut u = vec![1, 0, 0, 0];
        polar_transform(&mut u);
        assert_eq!(u, vec![1, 0, 0, 0]);
        let mut u = vec![0, 0, 0, 1];
        polar_transform(&mut u);
        assert_eq!(u, vec![1, 1, 1, 1]);

        // Explicit F (x) F (x) F.
        let f = [[1u8, 0], [1, 1]];
        let mut g = vec![vec![1u8]];
        for _ in 0..3 {
            let s = g.len();
            let mut next = vec![vec![0u8; 2 * s]; 2 * s];
            for (a, row_f) in f.iter().enumerate() {
                for (b, &fv) in row_f.iter().enumerate() {
                    for i in 0..s {
                        for j in 0..s {
                            next[a * s + i][b * s + j] = fv & g[i][j];
                        }
                    }
                }
            }
            g = next;
        }
        for (i, row) in g.iter().enumerate() {
            let mut u = vec![0u8; 8];
            u[i] = 1;
            polar_transform(&mut u);
            assert_eq!(&u, row, "row {i}");
        }
    }

    #[test]
    fn text_round_trip() {
        let layout = partitioned_crc_layout(64, &[CrcPolynomial::CRC6, CrcPolynomial::CRC10]);
        let spec = build_code_spec(64, 20, &layout).unwrap();
        let text = spec.to_text();
        assert!(text.contains("crc = 0..32 6 0x21"));
        assert_eq!(CodeSpec::from_text(&text).unwrap(), spec);
        assert!(CodeSpec::from_text("n = 8\nfrozen = 0101").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn transform_is_linear_and_involutive(
                a in proptest::collection::vec(0u8..2, 64),
                b in proptest::collection::vec(0u8..2, 64),
            ) {
                let mut ea = a.clone();
                polar_transform(&mut ea);
                let mut eb = b.clone();
                polar_transform(&mut eb);
                let mut sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
                polar_transform(&mut sum);
                let sum_enc: Vec<u8> = ea.iter().zip(&eb).map(|(x, y)| x ^ y).collect();
                prop_assert_eq!(&sum, &sum_enc);
                polar_transform(&mut ea);
                prop_assert_eq!(ea, a);
            }

            #[test]
            fn info_set_is_weight_optimal(m in 2u32..10, frac in 0.05f64..0.95) {
                let n = 1usize << m;
                let k = ((n as f64 * frac) as usize).clamp(1, n - 1);
                let spec = build_code_spec(n, k, &[]).unwrap();
                let w = beta_expansion_weights(n).unwrap();
                let worst_info = spec.info_set().iter().map(|&i| w[i]).fold(f64::INFINITY, f64::min);
                let best_frozen = spec.frozen_set().iter().map(|&i| w[i]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(best_frozen < worst_info);
                prop_assert_eq!(spec.info_set().len() + spec.frozen_set().len(), n);
            }
        }
    }
}
