//! Maximum-likelihood, bubble and bubble-with-memory decoding.
//!
//! Costs accumulate layer by layer in segment order, and within a segment in
//! pass order, in every decoder. Equal costs are ordered by ascending
//! candidate prefix value, so all three decoders agree bit for bit whenever
//! their search spaces coincide.

mod ledger;
mod tree;

pub use ledger::{layer_widths, ledger_account, LedgerMode, OpLedger, OpModel};
pub use tree::{bubble_decode, BdmDecoder, DecodingTree, Node};

use crate::channel::ChannelModel;
use crate::codec::{Message, SymbolGenerator};
use crate::{CodeParams, Error, Result};

/// Largest message length accepted by [`ml_decode`].
pub const ML_MAX_BITS: usize = 24;

/// Distance used between received values and candidate symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Squared Euclidean distance (AWGN).
    Euclidean,
    /// Hamming distance on bits (BSC).
    Hamming,
}

impl Metric {
    pub fn for_channel(ch: &ChannelModel) -> Self {
        if ch.is_awgn() {
            Self::Euclidean
        } else {
            Self::Hamming
        }
    }
}

/// Received values per segment, indexed by pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSet {
    metric: Metric,
    values: Vec<Vec<f64>>,
}

impl ReceivedSet {
    pub fn new(params: &CodeParams, metric: Metric) -> Self {
        Self {
            metric,
            values: vec![Vec::new(); params.segments()],
        }
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn segments(&self) -> usize {
        self.values.len()
    }

    /// Adds `y_{segment, pass}`. Passes of a segment must arrive in order.
    pub fn push(&mut self, segment: usize, pass: usize, value: f64) -> Result<()> {
        let limit = self.values.len() as u64 + 1;
        let slot = segment
            .checked_sub(1)
            .and_then(|i| self.values.get_mut(i))
            .ok_or(Error::OutOfRange {
                value: segment as u64,
                limit,
            })?;
        if pass != slot.len() + 1 {
            return Err(Error::OutOfOrderSymbol {
                segment,
                pass,
                expected: slot.len() + 1,
            });
        }
        slot.push(value);
        Ok(())
    }

    /// Values received for 1-based `segment`.
    pub fn segment(&self, segment: usize) -> &[f64] {
        &self.values[segment - 1]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.values.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    /// True once every segment holds at least one symbol.
    pub fn has_full_pass(&self) -> bool {
        self.values.iter().all(|v| !v.is_empty())
    }

    pub(crate) fn require_full_pass(&self) -> Result<()> {
        match self.values.iter().position(Vec::is_empty) {
            Some(i) => Err(Error::MissingSymbols { segment: i + 1, pass: 1 }),
            None => Ok(()),
        }
    }
}

/// Cost contributed by one segment: the distance between the received values
/// and the symbols generated from `spine`.
#[inline]
pub(crate) fn branch_cost(spine: u64, received: &[f64], metric: Metric, params: &CodeParams) -> f64 {
    branch_cost_from(spine, received, 0, 0.0, metric, params)
}

/// Continues a branch-cost sum over `received[start..]` from the running total
/// `acc`. Terms are added in pass order, so extending a cached sum gives the
/// same value as recomputing it.
pub(crate) fn branch_cost_from(
    spine: u64,
    received: &[f64],
    start: usize,
    acc: f64,
    metric: Metric,
    params: &CodeParams,
) -> f64 {
    let gen = SymbolGenerator::new(spine, params);
    let mut cost = acc;
    let mut term = |j: usize, raw: u32| match metric {
        Metric::Euclidean => {
            let d = received[j] - raw as f64;
            cost += d * d;
        }
        Metric::Hamming => {
            if received[j] != raw as f64 {
                cost += 1.0;
            }
        }
    };
    if start == 0 {
        gen.for_each(received.len(), &mut term);
    } else {
        for j in start..received.len() {
            term(j, gen.symbol(j));
        }
    }
    cost
}

/// Accumulated cost of the candidate `prefix` (segments `1..=prefix.len()`)
/// against every symbol present in `recv`.
pub fn path_cost(prefix: &[u32], recv: &ReceivedSet, params: &CodeParams) -> Result<f64> {
    if prefix.len() > params.segments() {
        return Err(Error::LengthMismatch {
            expected: params.segments(),
            actual: prefix.len(),
        });
    }
    let mut state = 0u64;
    let mut cost = 0.0;
    for (idx, &m) in prefix.iter().enumerate() {
        let received = recv.segment(idx + 1);
        if received.is_empty() {
            return Err(Error::MissingSymbols {
                segment: idx + 1,
                pass: 1,
            });
        }
        state = crate::codec::spine_step(params, state, m);
        cost += branch_cost(state, received, recv.metric(), params);
    }
    Ok(cost)
}

/// Exhaustive minimum-distance decoding over all `2^n` messages. Ties go to
/// the smallest message value.
pub fn ml_decode(recv: &ReceivedSet, params: &CodeParams) -> Result<Message> {
    if params.n() > ML_MAX_BITS {
        return Err(Error::Infeasible {
            n: params.n(),
            limit: ML_MAX_BITS,
        });
    }
    recv.require_full_pass()?;
    let depth = params.segments();
    let branching = params.branching() as u32;
    // Depth-first in ascending prefix order; a strict comparison keeps the
    // smallest message among equal costs.
    let mut best_cost = f64::INFINITY;
    let mut best = vec![0u32; depth];
    let mut path = vec![0u32; depth];
    let mut states = vec![0u64; depth + 1];
    let mut costs = vec![0.0f64; depth + 1];
    let mut layer = 0usize;
    path[0] = 0;
    loop {
        let m = path[layer];
        let state = crate::codec::spine_step(params, states[layer], m);
        let cost = costs[layer] + branch_cost(state, recv.segment(layer + 1), recv.metric(), params);
        if layer + 1 == depth {
            if cost < best_cost {
                best_cost = cost;
                best.copy_from_slice(&path);
            }
        } else {
            states[layer + 1] = state;
            costs[layer + 1] = cost;
            layer += 1;
            path[layer] = 0;
            continue;
        }
        // advance to the next sibling, backtracking as needed
        loop {
            path[layer] += 1;
            if path[layer] < branching {
                break;
            }
            if layer == 0 {
                return Message::from_segments(best, params);
            }
            layer -= 1;
        }
    }
}
