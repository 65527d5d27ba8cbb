//! Fixed-length binary chromosomes.
//!
//! A chromosome of segment length `l` holds `3 * l` bits laid out as
//! `[type | alpha | beta]`. Each segment decodes to a base-two integer with
//! the rightmost bit as the least significant, and normalizes onto `[0, 1]`
//! by dividing by `2^l - 1`.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};

/// Largest supported segment length; one segment must fit in a `u64` draw.
pub const MAX_SEGMENT_LEN: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    Type,
    Alpha,
    Beta,
}

impl Segment {
    pub const ALL: [Segment; 3] = [Segment::Type, Segment::Alpha, Segment::Beta];

    fn offset(self) -> usize {
        match self {
            Segment::Type => 0,
            Segment::Alpha => 1,
            Segment::Beta => 2,
        }
    }
}

/// A haploid bitstring genome. Bits are stored as `0`/`1` bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    bits: Vec<u8>,
    segment_len: usize,
}

impl Chromosome {
    pub fn new(bits: Vec<u8>, segment_len: usize) -> Result<Self> {
        check_segment_len(segment_len)?;
        if bits.len() != 3 * segment_len {
            return Err(Error::ChromosomeLength {
                segment_len,
                expected: 3 * segment_len,
                actual: bits.len(),
            });
        }
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(char::from(b'0'.wrapping_add(bad))));
        }
        Ok(Self { bits, segment_len })
    }

    /// Builds a chromosome from its three segments.
    pub fn from_segments(type_seg: &[u8], alpha: &[u8], beta: &[u8]) -> Result<Self> {
        let l = type_seg.len();
        for seg in [alpha, beta] {
            if seg.len() != l {
                return Err(Error::SegmentMismatch {
                    expected: l,
                    actual: seg.len(),
                });
            }
        }
        let mut bits = Vec::with_capacity(3 * l);
        bits.extend_from_slice(type_seg);
        bits.extend_from_slice(alpha);
        bits.extend_from_slice(beta);
        Self::new(bits, l)
    }

    pub fn segment_len(&self) -> usize {
        self.segment_len
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn segment(&self, seg: Segment) -> &[u8] {
        let start = seg.offset() * self.segment_len;
        &self.bits[start..start + self.segment_len]
    }

    pub fn segment_mut(&mut self, seg: Segment) -> &mut [u8] {
        let start = seg.offset() * self.segment_len;
        &mut self.bits[start..start + self.segment_len]
    }

    /// Replaces the type segment, leaving the alpha and beta genes intact.
    pub fn with_type_segment(mut self, type_seg: &[u8]) -> Result<Self> {
        if type_seg.len() != self.segment_len {
            return Err(Error::SegmentMismatch {
                expected: self.segment_len,
                actual: type_seg.len(),
            });
        }
        self.segment_mut(Segment::Type).copy_from_slice(type_seg);
        Ok(self)
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Chromosome {
    type Err = Error;

    /// Parses the `'0'`/`'1'` log format; the segment length is `len / 3`.
    fn from_str(s: &str) -> Result<Self> {
        let bits = parse_bits(s)?;
        if bits.len() % 3 != 0 || bits.is_empty() {
            return Err(Error::ChromosomeLength {
                segment_len: bits.len() / 3,
                expected: 3 * (bits.len() / 3).max(1),
                actual: bits.len(),
            });
        }
        let l = bits.len() / 3;
        Self::new(bits, l)
    }
}

/// Parses a string of `'0'`/`'1'` characters into bits.
pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::InvalidBit(other)),
        })
        .collect()
}

/// Normalized genome values, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedGenome {
    pub x: f64,
    pub alpha_gene: f64,
    pub beta_gene: f64,
}

fn check_segment_len(l: usize) -> Result<()> {
    if l == 0 || l > MAX_SEGMENT_LEN {
        return Err(Error::SegmentLength(l));
    }
    Ok(())
}

/// Reads a segment as a base-two integer, rightmost bit least significant.
pub fn decode_segment(segment: &[u8]) -> Result<u64> {
    check_segment_len(segment.len())?;
    segment.iter().try_fold(0u64, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | u64::from(b)),
        other => Err(Error::InvalidBit(char::from(b'0'.wrapping_add(other)))),
    })
}

/// Inverse of [`decode_segment`]: the `l`-bit base-two layout of `m`.
pub fn encode_segment(m: u64, l: usize) -> Result<Vec<u8>> {
    check_segment_len(l)?;
    if m > max_value(l) {
        return Err(Error::DecodedOutOfRange {
            value: m,
            segment_len: l,
        });
    }
    Ok((0..l).rev().map(|k| ((m >> k) & 1) as u8).collect())
}

fn max_value(l: usize) -> u64 {
    (1u64 << l) - 1
}

/// Maps `m` in `[0, 2^l - 1]` onto `[0, 1]`.
pub fn normalize(m: u64, l: usize) -> Result<f64> {
    check_segment_len(l)?;
    let k = max_value(l);
    if m > k {
        return Err(Error::DecodedOutOfRange {
            value: m,
            segment_len: l,
        });
    }
    Ok(m as f64 / k as f64)
}

pub fn decode(chromosome: &Chromosome) -> DecodedGenome {
    let l = chromosome.segment_len();
    // Segments are validated at construction, so these cannot fail.
    let value = |seg| {
        let m = decode_segment(chromosome.segment(seg)).expect("validated segment");
        normalize(m, l).expect("decoded value within range")
    };
    DecodedGenome {
        x: value(Segment::Type),
        alpha_gene: value(Segment::Alpha),
        beta_gene: value(Segment::Beta),
    }
}

/// Draws `l` fair, independent bits from a single 64-bit word of `rng`,
/// most significant first.
pub fn fresh_type_segment<R: RngCore + ?Sized>(l: usize, rng: &mut R) -> Result<Vec<u8>> {
    check_segment_len(l)?;
    let word = rng.next_u64();
    Ok((0..l).map(|k| ((word >> (63 - k)) & 1) as u8).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitPolicy {
    /// Alpha and beta genes all zero, so every identity is binary.
    #[default]
    BinaryOrigin,
    UniformRandom,
}

impl InitPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            InitPolicy::BinaryOrigin => "binary_origin",
            InitPolicy::UniformRandom => "uniform_random",
        }
    }
}

impl FromStr for InitPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "binary_origin" => Ok(InitPolicy::BinaryOrigin),
            "uniform_random" => Ok(InitPolicy::UniformRandom),
            other => Err(format!(
                "unknown init policy `{other}` (expected binary_origin or uniform_random)"
            )),
        }
    }
}

pub fn initial_population<R: RngCore + ?Sized>(
    n: usize,
    l: usize,
    policy: InitPolicy,
    rng: &mut R,
) -> Result<Vec<Chromosome>> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::PopulationSize(n));
    }
    check_segment_len(l)?;
    (0..n)
        .map(|_| {
            let type_seg = fresh_type_segment(l, rng)?;
            let (alpha, beta) = match policy {
                InitPolicy::BinaryOrigin => (vec![0; l], vec![0; l]),
                InitPolicy::UniformRandom => {
                    (fresh_type_segment(l, rng)?, fresh_type_segment(l, rng)?)
                }
            };
            Chromosome::from_segments(&type_seg, &alpha, &beta)
        })
        .collect()
}
