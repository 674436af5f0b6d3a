use std::cmp::Ordering;

use super::ledger::OpModel;
use super::{branch_cost, branch_cost_from, Metric, ReceivedSet};
use crate::codec::{spine_step, Message};
use crate::{CodeParams, Result};

/// One surviving node of the beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    /// Index of the parent in the previous layer (0 for layer 1).
    pub parent: u32,
    /// Value of the segment this node appends.
    pub segment: u32,
    pub spine: u64,
    /// Accumulated cost over layers `1..=i`.
    pub cost: f64,
    /// Position of this node's prefix in ascending prefix order among the
    /// survivors of its layer.
    pub rank: u32,
}

const ROOT: Node = Node {
    parent: 0,
    segment: 0,
    spine: 0,
    cost: 0.0,
    rank: 0,
};

/// Unpruned child of the last layer with its branch cost so far, so a tail
/// arrival only adds the new symbol's term.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TailEntry {
    parent: u32,
    segment: u32,
    spine: u64,
    branch: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    node: Node,
    // (parent rank, segment) packed; orders candidates by prefix value
    key: u64,
}

fn by_cost_then_prefix(a: &Candidate, b: &Candidate) -> Ordering {
    a.node.cost.total_cmp(&b.node.cost).then(a.key.cmp(&b.key))
}

/// Beam-search tree kept between decode attempts.
///
/// Layer `i` keeps the `B` lowest-cost children of layer `i - 1`, sorted by
/// cost and then by prefix value, so `layer(n/k)[0]` is the decision.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingTree {
    params: CodeParams,
    layers: Vec<Vec<Node>>,
    expanded: Vec<usize>,
    tail: Vec<TailEntry>,
    tail_symbols: usize,
}

impl DecodingTree {
    /// Runs a full bubble decode over `recv`.
    pub fn build(recv: &ReceivedSet, params: &CodeParams) -> Result<Self> {
        let mut tree = Self {
            params: *params,
            layers: Vec::with_capacity(params.segments()),
            expanded: Vec::with_capacity(params.segments()),
            tail: Vec::new(),
            tail_symbols: 0,
        };
        tree.rebuild_from(1, recv)?;
        Ok(tree)
    }

    /// Keeps layers `1..from` and recomputes layers `from..=n/k`. Returns the
    /// number of children expanded in each recomputed layer.
    pub fn rebuild_from(&mut self, from: usize, recv: &ReceivedSet) -> Result<&[usize]> {
        recv.require_full_pass()?;
        let from = from.clamp(1, self.layers.len() + 1);
        self.layers.truncate(from - 1);
        self.expanded.truncate(from - 1);
        let s = self.params.segments();
        for i in from..=s {
            let received = recv.segment(i);
            let parents = match self.layers.last() {
                Some(layer) => layer.as_slice(),
                None => std::slice::from_ref(&ROOT),
            };
            let (survivors, width) = if i < s {
                expand(parents, received, recv.metric(), &self.params)
            } else {
                if from < s || self.tail.is_empty() || self.tail_symbols > received.len() {
                    self.tail = tail_entries(parents, &self.params);
                    self.tail_symbols = 0;
                }
                for e in &mut self.tail {
                    e.branch = branch_cost_from(e.spine, received, self.tail_symbols, e.branch, recv.metric(), &self.params);
                }
                self.tail_symbols = received.len();
                let children = self
                    .tail
                    .iter()
                    .map(|e| {
                        let parent = &parents[e.parent as usize];
                        Candidate {
                            node: Node {
                                parent: e.parent,
                                segment: e.segment,
                                spine: e.spine,
                                cost: parent.cost + e.branch,
                                rank: 0,
                            },
                            key: ((parent.rank as u64) << self.params.k()) | e.segment as u64,
                        }
                    })
                    .collect();
                (prune(children, self.params.beam()), self.tail.len())
            };
            self.layers.push(survivors);
            self.expanded.push(width);
        }
        Ok(&self.expanded[from - 1..])
    }

    /// Adds one received symbol and updates the tree from its segment on.
    /// Returns the new decision and the operations charged under `model`.
    pub fn ingest(
        &mut self,
        recv: &mut ReceivedSet,
        segment: usize,
        pass: usize,
        value: f64,
        model: &OpModel,
    ) -> Result<(Message, f64)> {
        recv.push(segment, pass, value)?;
        let widths = self.rebuild_from(segment, recv)?;
        let ops = widths.iter().map(|&x| model.unit_cost(x as u64)).sum();
        Ok((self.best()?, ops))
    }

    /// Survivors of 1-based layer `i`, best first.
    pub fn layer(&self, i: usize) -> &[Node] {
        &self.layers[i - 1]
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Children expanded per layer (`x_i`).
    pub fn expanded(&self) -> &[usize] {
        &self.expanded
    }

    /// Cost of the current decision.
    pub fn best_cost(&self) -> f64 {
        self.layers.last().map_or(f64::INFINITY, |l| l[0].cost)
    }

    /// Lowest-cost leaf of the last layer, traced back to a message.
    pub fn best(&self) -> Result<Message> {
        let s = self.params.segments();
        let mut segments = vec![0u32; s];
        let mut idx = 0usize;
        for layer in (0..s).rev() {
            let node = self.layers[layer][idx];
            segments[layer] = node.segment;
            idx = node.parent as usize;
        }
        Message::from_segments(segments, &self.params)
    }
}

fn expand(parents: &[Node], received: &[f64], metric: Metric, params: &CodeParams) -> (Vec<Node>, usize) {
    let branching = params.branching() as u32;
    let k = params.k();
    let mut children = Vec::with_capacity(parents.len() * branching as usize);
    for (pi, parent) in parents.iter().enumerate() {
        for m in 0..branching {
            let spine = spine_step(params, parent.spine, m);
            let node = Node {
                parent: pi as u32,
                segment: m,
                spine,
                cost: parent.cost + branch_cost(spine, received, metric, params),
                rank: 0,
            };
            children.push(Candidate {
                node,
                key: ((parent.rank as u64) << k) | m as u64,
            });
        }
    }
    let width = children.len();
    (prune(children, params.beam()), width)
}

fn tail_entries(parents: &[Node], params: &CodeParams) -> Vec<TailEntry> {
    let branching = params.branching() as u32;
    let mut out = Vec::with_capacity(parents.len() * branching as usize);
    for (pi, parent) in parents.iter().enumerate() {
        for m in 0..branching {
            out.push(TailEntry {
                parent: pi as u32,
                segment: m,
                spine: spine_step(params, parent.spine, m),
                branch: 0.0,
            });
        }
    }
    out
}

/// Keeps the `beam` best candidates sorted by cost, then ranks them by prefix.
fn prune(mut children: Vec<Candidate>, beam: usize) -> Vec<Node> {
    if children.len() > beam {
        children.select_nth_unstable_by(beam - 1, by_cost_then_prefix);
        children.truncate(beam);
    }
    children.sort_unstable_by(by_cost_then_prefix);
    let mut order: Vec<usize> = (0..children.len()).collect();
    order.sort_unstable_by_key(|&i| children[i].key);
    for (rank, &i) in order.iter().enumerate() {
        children[i].node.rank = rank as u32;
    }
    children.into_iter().map(|c| c.node).collect()
}

/// Beam search keeping the `B` lowest-cost nodes per layer; the decision is
/// the lowest-cost survivor of the last layer.
pub fn bubble_decode(recv: &ReceivedSet, params: &CodeParams) -> Result<Message> {
    DecodingTree::build(recv, params)?.best()
}

/// Incremental bubble decoder: keeps its tree between arrivals and only
/// recomputes layers at or after the earliest segment touched since the last
/// decode.
#[derive(Debug, Clone)]
pub struct BdmDecoder {
    params: CodeParams,
    recv: ReceivedSet,
    tree: Option<DecodingTree>,
    dirty_from: Option<usize>,
    model: OpModel,
    ops: f64,
}

impl BdmDecoder {
    pub fn new(params: &CodeParams, metric: Metric, model: OpModel) -> Self {
        Self {
            params: *params,
            recv: ReceivedSet::new(params, metric),
            tree: None,
            dirty_from: None,
            model,
            ops: 0.0,
        }
    }

    /// Records a symbol without decoding.
    pub fn push(&mut self, segment: usize, pass: usize, value: f64) -> Result<()> {
        self.recv.push(segment, pass, value)?;
        self.dirty_from = Some(self.dirty_from.map_or(segment, |d| d.min(segment)));
        Ok(())
    }

    /// Brings the tree up to date and returns the decision, or `None` until a
    /// full pass has arrived.
    pub fn decode(&mut self) -> Result<Option<Message>> {
        if !self.recv.has_full_pass() {
            return Ok(None);
        }
        let widths: Vec<usize> = match (&mut self.tree, self.dirty_from) {
            (None, _) => {
                let tree = DecodingTree::build(&self.recv, &self.params)?;
                let widths = tree.expanded().to_vec();
                self.tree = Some(tree);
                widths
            }
            (Some(tree), Some(from)) => tree.rebuild_from(from, &self.recv)?.to_vec(),
            (Some(_), None) => Vec::new(),
        };
        self.ops += widths.iter().map(|&x| self.model.unit_cost(x as u64)).sum::<f64>();
        self.dirty_from = None;
        self.tree.as_ref().map(DecodingTree::best).transpose()
    }

    /// [`push`](Self::push) followed by [`decode`](Self::decode).
    pub fn ingest(&mut self, segment: usize, pass: usize, value: f64) -> Result<Option<Message>> {
        self.push(segment, pass, value)?;
        self.decode()
    }

    /// Operations charged so far.
    pub fn ops(&self) -> f64 {
        self.ops
    }

    pub fn received(&self) -> &ReceivedSet {
        &self.recv
    }

    pub fn tree(&self) -> Option<&DecodingTree> {
        self.tree.as_ref()
    }
}
