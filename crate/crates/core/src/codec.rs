//! Spinal encoding: message segmentation, the hash chain and symbol generation.
//!
//! The hash and the symbol generator are both built on the 64-bit SplitMix
//! finalizer:
//!
//! ```text
//! mix(z) = z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//!          z ^= z >> 27; z *= 0x94d049bb133111eb;
//!          z ^ (z >> 31)
//! ```
//!
//! * spine step: `h(s, m) = mix(mix(s ^ salt) ^ (m + 1) * 0x9e3779b97f4a7c15) & (2^v - 1)`
//! * symbol word `w` (0-based) of spine `s`:
//!   `key = mix(s ^ rotl(salt, 17) ^ 0x52_4e_47_2d_53_59_4d_42)`,
//!   `word(w) = mix(key + (w + 1) * 0x9e3779b97f4a7c15)`
//! * each word yields `floor(64 / c)` symbols, most significant bits first.
//!
//! All arithmetic is wrapping. Bit order is MSB-first everywhere: the first
//! message bit is the most significant bit of segment 1.

use rand::Rng;

use crate::schedule::TransmissionPlan;
use crate::{CodeParams, Error, Result};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const SYMBOL_DOMAIN: u64 = 0x524e_472d_5359_4d42;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One step of the hash chain: `s_i = h(s_{i-1}, m_i)`.
#[inline]
pub fn spine_step(params: &CodeParams, state: u64, segment: u32) -> u64 {
    let keyed = mix64(state ^ params.salt());
    mix64(keyed ^ (segment as u64 + 1).wrapping_mul(GOLDEN)) & params.spine_mask()
}

/// A message split into `n / k` segments of `k` bits each.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    segments: Vec<u32>,
    k: usize,
}

impl Message {
    pub fn from_segments(segments: Vec<u32>, params: &CodeParams) -> Result<Self> {
        if segments.len() != params.segments() {
            return Err(Error::LengthMismatch {
                expected: params.segments(),
                actual: segments.len(),
            });
        }
        let limit = params.branching() as u64;
        if let Some(&bad) = segments.iter().find(|&&s| s as u64 >= limit) {
            return Err(Error::OutOfRange {
                value: bad as u64,
                limit,
            });
        }
        Ok(Self {
            segments,
            k: params.k(),
        })
    }

    /// Builds a message from its integer value (first segment most significant).
    /// Only meaningful for `n <= 64`.
    pub fn from_value(value: u64, params: &CodeParams) -> Result<Self> {
        let n = params.n();
        if n > 64 || (n < 64 && value >> n != 0) {
            return Err(Error::OutOfRange {
                value,
                limit: if n >= 64 { u64::MAX } else { 1 << n },
            });
        }
        let k = params.k();
        let s = params.segments();
        let mask = (1u64 << k) - 1;
        let segments = (0..s)
            .map(|i| ((value >> (k * (s - 1 - i))) & mask) as u32)
            .collect();
        Ok(Self { segments, k })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, params: &CodeParams) -> Self {
        let limit = params.branching() as u32;
        let segments = (0..params.segments())
            .map(|_| rng.random_range(0..limit))
            .collect();
        Self {
            segments,
            k: params.k(),
        }
    }

    pub fn segments(&self) -> &[u32] {
        &self.segments
    }

    /// Integer value of the message, when it fits in 64 bits.
    pub fn value(&self) -> Option<u64> {
        if self.segments.len() * self.k > 64 {
            return None;
        }
        Some(
            self.segments
                .iter()
                .fold(0u64, |acc, &s| (acc << self.k) | s as u64),
        )
    }

    pub fn bits(&self) -> Vec<bool> {
        self.segments
            .iter()
            .flat_map(|&s| (0..self.k).rev().map(move |b| (s >> b) & 1 == 1))
            .collect()
    }
}

/// Splits `bits` into `k`-bit segments, first bit most significant.
pub fn segment_message(bits: &[bool], params: &CodeParams) -> Result<Message> {
    if bits.len() != params.n() {
        return Err(Error::LengthMismatch {
            expected: params.n(),
            actual: bits.len(),
        });
    }
    let segments = bits
        .chunks(params.k())
        .map(|chunk| chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
        .collect();
    Ok(Message {
        segments,
        k: params.k(),
    })
}

/// Spine values `s_1 .. s_{n/k}` of a message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpineChain {
    spines: Vec<u64>,
}

impl SpineChain {
    pub fn spines(&self) -> &[u64] {
        &self.spines
    }

    /// Spine of 1-based segment `i`.
    pub fn spine(&self, i: usize) -> u64 {
        self.spines[i - 1]
    }
}

pub fn compute_spines(msg: &Message, params: &CodeParams) -> SpineChain {
    let spines = msg
        .segments
        .iter()
        .scan(0u64, |state, &m| {
            *state = spine_step(params, *state, m);
            Some(*state)
        })
        .collect();
    SpineChain { spines }
}

/// Counter-mode generator seeded by a spine value. Symbol `j` (0-based) can
/// be produced without generating the ones before it.
#[derive(Debug, Clone, Copy)]
pub struct SymbolGenerator {
    key: u64,
    c: u32,
    per_word: u32,
    mask: u64,
}

impl SymbolGenerator {
    pub fn new(spine: u64, params: &CodeParams) -> Self {
        let c = params.c();
        Self {
            key: mix64(spine ^ params.salt().rotate_left(17) ^ SYMBOL_DOMAIN),
            c,
            per_word: 64 / c,
            mask: params.symbol_levels() - 1,
        }
    }

    #[inline]
    fn word(&self, w: u64) -> u64 {
        mix64(self.key.wrapping_add((w + 1).wrapping_mul(GOLDEN)))
    }

    /// Raw value of the symbol with 0-based index `j`.
    #[inline]
    pub fn symbol(&self, j: usize) -> u32 {
        let per = self.per_word as usize;
        let word = self.word((j / per) as u64);
        let shift = 64 - self.c * (1 + (j % per) as u32);
        ((word >> shift) & self.mask) as u32
    }

    /// Calls `f(j, raw)` for the 0-based symbol indices `0..count`.
    #[inline]
    pub fn for_each(&self, count: usize, mut f: impl FnMut(usize, u32)) {
        let per = self.per_word as usize;
        let mut j = 0;
        let mut w = 0u64;
        while j < count {
            let word = self.word(w);
            let end = (j + per).min(count);
            let mut shift = 64 - self.c;
            while j < end {
                f(j, ((word >> shift) & self.mask) as u32);
                shift = shift.wrapping_sub(self.c);
                j += 1;
            }
            w += 1;
        }
    }
}

/// First `count` raw symbols generated from `spine`.
pub fn generate_symbols(spine: u64, count: usize, params: &CodeParams) -> Vec<u32> {
    let gen = SymbolGenerator::new(spine, params);
    let mut out = Vec::with_capacity(count);
    gen.for_each(count, |_, raw| out.push(raw));
    out
}

/// Maps a raw symbol onto the integer grid `[0, 2^c - 1]`. For the BSC
/// (`c = 1`) this is the identity on the bit.
pub fn map_to_channel(raw: u32, params: &CodeParams) -> Result<f64> {
    if raw as u64 >= params.symbol_levels() {
        return Err(Error::OutOfRange {
            value: raw as u64,
            limit: params.symbol_levels(),
        });
    }
    Ok(raw as f64)
}

/// One coded symbol. `segment` and `pass` are 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Symbol {
    pub segment: usize,
    pub pass: usize,
    pub raw: u32,
    pub mapped: f64,
}

/// Encoder state for one message: spines and their generators.
#[derive(Debug, Clone)]
pub struct Encoder {
    spines: SpineChain,
    generators: Vec<SymbolGenerator>,
}

impl Encoder {
    pub fn new(msg: &Message, params: &CodeParams) -> Self {
        let spines = compute_spines(msg, params);
        let generators = spines
            .spines()
            .iter()
            .map(|&s| SymbolGenerator::new(s, params))
            .collect();
        Self { spines, generators }
    }

    pub fn spines(&self) -> &SpineChain {
        &self.spines
    }

    /// Symbol `(segment, pass)`, both 1-based.
    pub fn symbol(&self, segment: usize, pass: usize) -> Symbol {
        let raw = self.generators[segment - 1].symbol(pass - 1);
        Symbol {
            segment,
            pass,
            raw,
            mapped: raw as f64,
        }
    }
}

/// Emits the symbols of `plan`: pass by pass, segments within a pass in the
/// plan's order, and `(i, j)` present iff `j <= l_i`.
pub fn encode_stream(msg: &Message, plan: &TransmissionPlan, params: &CodeParams) -> Result<Vec<Symbol>> {
    if plan.counts().len() != params.segments() {
        return Err(Error::PlanMismatch {
            expected: params.segments(),
            actual: plan.counts().len(),
        });
    }
    let encoder = Encoder::new(msg, params);
    let max_pass = plan.counts().iter().copied().max().unwrap_or(0);
    let mut out = Vec::with_capacity(plan.total());
    for pass in 1..=max_pass {
        for &segment in plan.order() {
            if pass <= plan.counts()[segment - 1] {
                out.push(encoder.symbol(segment, pass));
            }
        }
    }
    Ok(out)
}
