//! Transmission plans, emission schedules and the greedy plan optimizer.

use std::fmt;
use std::str::FromStr;

use crate::bounds::{fer_bound_new, BoundConfig, BoundResult};
use crate::channel::{capacity, ChannelModel};
use crate::par::{try_map_indices, Execution};
use crate::{CodeParams, Error, Result};

/// Scheme tag carried by a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    PassByPass,
    UniformPuncturing,
    IncrementalTail,
    Improved,
    /// Output of [`solve_min_fer`].
    Optimized,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::PassByPass,
        Scheme::UniformPuncturing,
        Scheme::IncrementalTail,
        Scheme::Improved,
        Scheme::Optimized,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::PassByPass => "pass_by_pass",
            Self::UniformPuncturing => "uniform_puncturing",
            Self::IncrementalTail => "incremental_tail",
            Self::Improved => "improved",
            Self::Optimized => "optimized",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "pass_by_pass" | "pass" => Ok(Self::PassByPass),
            "uniform_puncturing" | "uniform" => Ok(Self::UniformPuncturing),
            "incremental_tail" | "tail" => Ok(Self::IncrementalTail),
            "improved" => Ok(Self::Improved),
            "optimized" => Ok(Self::Optimized),
            _ => Err(Error::Parse(format!("unknown scheme '{s}'"))),
        }
    }
}

fn check_permutation(order: &[usize], segments: usize) -> Result<()> {
    if order.len() != segments {
        return Err(Error::PlanMismatch {
            expected: segments,
            actual: order.len(),
        });
    }
    let mut seen = vec![false; segments];
    for &g in order {
        if g == 0 || g > segments || seen[g - 1] {
            return Err(Error::BadPermutation(g));
        }
        seen[g - 1] = true;
    }
    Ok(())
}

/// Per-segment symbol counts plus the intra-pass emission order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransmissionPlan {
    counts: Vec<usize>,
    order: Vec<usize>,
    scheme: Scheme,
}

impl TransmissionPlan {
    /// `order` must be a permutation of `1..=counts.len()`.
    pub fn new(counts: Vec<usize>, order: Vec<usize>, scheme: Scheme) -> Result<Self> {
        check_permutation(&order, counts.len())?;
        Ok(Self { counts, order, scheme })
    }

    /// `passes` symbols for each of the `n / k` segments, ascending order.
    pub fn uniform(params: &CodeParams, passes: usize, scheme: Scheme) -> Self {
        let s = params.segments();
        Self {
            counts: vec![passes; s],
            order: (1..=s).collect(),
            scheme,
        }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// True when every segment has at least one symbol.
    pub fn is_complete(&self) -> bool {
        self.counts.iter().all(|&l| l >= 1)
    }

    /// Plain-text form: a `key=value` header line, the counts, then the order.
    pub fn to_text(&self, params: &CodeParams, channel: &ChannelModel) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        format!(
            "n={} k={} c={} scheme={} channel={}\n{}\n{}\n",
            params.n(),
            params.k(),
            params.c(),
            self.scheme,
            channel,
            join(&self.counts),
            join(&self.order)
        )
    }

    /// Parses [`to_text`](Self::to_text) output.
    pub fn from_text(text: &str) -> Result<(PlanHeader, Self)> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty plan file".into()))?
            .parse::<PlanHeader>()?;
        let numbers = |line: Option<&str>, what: &str| -> Result<Vec<usize>> {
            line.ok_or_else(|| Error::Parse(format!("plan file lacks the {what} line")))?
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad {what} entry '{t}'"))))
                .collect()
        };
        let counts = numbers(lines.next(), "counts")?;
        let order = numbers(lines.next(), "order")?;
        if header.n % header.k != 0 || counts.len() != header.n / header.k {
            return Err(Error::PlanMismatch {
                expected: header.n / header.k.max(1),
                actual: counts.len(),
            });
        }
        let plan = Self::new(counts, order, header.scheme)?;
        Ok((header, plan))
    }
}

/// Header of a serialized plan.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanHeader {
    pub n: usize,
    pub k: usize,
    pub c: u32,
    pub scheme: Scheme,
    pub channel: String,
}

impl FromStr for PlanHeader {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let (mut n, mut k, mut c, mut scheme, mut channel) = (None, None, None, None, None);
        for field in line.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field '{field}'")))?;
            let num = || value.parse::<usize>().map_err(|_| Error::Parse(format!("bad {key} '{value}'")));
            match key {
                "n" => n = Some(num()?),
                "k" => k = Some(num()?),
                "c" => c = Some(num()? as u32),
                "scheme" => scheme = Some(value.parse()?),
                "channel" => channel = Some(value.to_string()),
                _ => return Err(Error::Parse(format!("unknown header key '{key}'"))),
            }
        }
        let missing = |what: &str| Error::Parse(format!("plan header lacks '{what}'"));
        Ok(Self {
            n: n.ok_or_else(|| missing("n"))?,
            k: k.filter(|&k| k > 0).ok_or_else(|| missing("k"))?,
            c: c.ok_or_else(|| missing("c"))?,
            scheme: scheme.ok_or_else(|| missing("scheme"))?,
            channel: channel.ok_or_else(|| missing("channel"))?,
        })
    }
}

/// `R = n / sum l_i`.
pub fn code_rate(plan: &TransmissionPlan, params: &CodeParams) -> Result<f64> {
    match plan.total() {
        0 => Err(Error::EmptyPlan),
        total => Ok(params.n() as f64 / total as f64),
    }
}

/// Order used by uniform puncturing when none is given. Eight segments use
/// `[8, 4, 6, 2, 5, 1, 7, 3]`; other sizes use the bit-reversal permutation.
pub fn default_puncturing_order(segments: usize) -> Vec<usize> {
    if segments == 8 {
        return vec![8, 4, 6, 2, 5, 1, 7, 3];
    }
    let bits = usize::BITS - segments.saturating_sub(1).leading_zeros();
    let reverse = |x: usize| if bits == 0 { 0 } else { x.reverse_bits() >> (usize::BITS - bits) };
    let mut order: Vec<usize> = (0..1usize << bits).map(reverse).filter(|&x| x < segments).map(|x| x + 1).collect();
    order.dedup();
    order
}

/// Switch-over threshold of the improved scheme: `floor(n / C - n / k)` on
/// AWGN and `floor(n / C)` on the BSC.
pub fn switch_threshold(params: &CodeParams, channel: &ChannelModel) -> Result<i64> {
    let cap = capacity(channel, params);
    if cap <= 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let n = params.n() as f64;
    let t = if channel.is_awgn() {
        n / cap - params.segments() as f64
    } else {
        n / cap
    };
    Ok(t.floor() as i64)
}

/// Emission rule of a rateless schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    /// Whole passes in ascending segment order; decoding only at pass ends.
    PassByPass,
    /// Whole passes in the order `g`, one sub-pass (symbol) at a time.
    UniformPuncturing { order: Vec<usize> },
    /// One ascending pass, then only last-segment symbols.
    IncrementalTail,
    /// Passes in the order `g` until `threshold` symbols, then last-segment symbols.
    Improved { order: Vec<usize>, threshold: i64 },
}

impl Schedule {
    pub fn uniform_puncturing(params: &CodeParams, order: Option<Vec<usize>>) -> Result<Self> {
        let order = order.unwrap_or_else(|| default_puncturing_order(params.segments()));
        check_permutation(&order, params.segments())?;
        Ok(Self::UniformPuncturing { order })
    }

    pub fn improved(params: &CodeParams, channel: &ChannelModel) -> Result<Self> {
        Ok(Self::Improved {
            order: (1..=params.segments()).rev().collect(),
            threshold: switch_threshold(params, channel)?,
        })
    }

    /// Builds the schedule for `scheme`. Optimized plans are emitted like the
    /// incremental-tail schedule they converge to.
    pub fn for_scheme(scheme: Scheme, params: &CodeParams, channel: &ChannelModel) -> Result<Self> {
        match scheme {
            Scheme::PassByPass => Ok(Self::PassByPass),
            Scheme::UniformPuncturing => Self::uniform_puncturing(params, None),
            Scheme::IncrementalTail | Scheme::Optimized => Ok(Self::IncrementalTail),
            Scheme::Improved => Self::improved(params, channel),
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            Self::PassByPass => Scheme::PassByPass,
            Self::UniformPuncturing { .. } => Scheme::UniformPuncturing,
            Self::IncrementalTail => Scheme::IncrementalTail,
            Self::Improved { .. } => Scheme::Improved,
        }
    }

    /// Whether the receiver attempts a decode after `emitted` symbols.
    pub fn decode_point(&self, emitted: usize, params: &CodeParams) -> bool {
        let s = params.segments();
        match self {
            Self::PassByPass => emitted % s == 0 && emitted > 0,
            _ => emitted >= s,
        }
    }

    pub fn emissions(&self, params: &CodeParams) -> Emissions {
        let s = params.segments();
        let (order, threshold) = match self {
            Self::PassByPass => ((1..=s).collect(), None),
            Self::UniformPuncturing { order } => (order.clone(), None),
            Self::IncrementalTail => ((1..=s).collect(), Some(s as i64)),
            Self::Improved { order, threshold } => (order.clone(), Some(*threshold)),
        };
        Emissions {
            order,
            threshold,
            counts: vec![0; s],
            emitted: 0,
            position: 0,
            tail_only: false,
        }
    }
}

/// Infinite iterator of `(segment, pass)` pairs, both 1-based.
#[derive(Debug, Clone)]
pub struct Emissions {
    order: Vec<usize>,
    threshold: Option<i64>,
    counts: Vec<usize>,
    emitted: usize,
    position: usize,
    tail_only: bool,
}

impl Emissions {
    /// Symbols emitted so far per segment.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    /// True once the schedule only emits last-segment symbols.
    pub fn in_tail_stage(&self) -> bool {
        self.tail_only
    }
}

impl Iterator for Emissions {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        let s = self.order.len();
        let first_pass_done = self.emitted >= s;
        if !self.tail_only && first_pass_done {
            if let Some(t) = self.threshold {
                if self.emitted as i64 + 1 > t {
                    self.tail_only = true;
                }
            }
        }
        let segment = if self.tail_only {
            s
        } else {
            let g = self.order[self.position];
            self.position = (self.position + 1) % s;
            g
        };
        self.counts[segment - 1] += 1;
        self.emitted += 1;
        Some((segment, self.counts[segment - 1]))
    }
}

/// Counts after the first `emitted` symbols of `schedule`.
pub fn counts_after(schedule: &Schedule, params: &CodeParams, emitted: usize) -> Vec<usize> {
    let mut it = schedule.emissions(params);
    it.by_ref().take(emitted).for_each(drop);
    it.counts().to_vec()
}

pub fn schedule_pass_by_pass(params: &CodeParams) -> Emissions {
    Schedule::PassByPass.emissions(params)
}

pub fn schedule_uniform_puncturing(params: &CodeParams, order: Option<Vec<usize>>) -> Result<Emissions> {
    Ok(Schedule::uniform_puncturing(params, order)?.emissions(params))
}

pub fn schedule_incremental_tail(params: &CodeParams) -> Emissions {
    Schedule::IncrementalTail.emissions(params)
}

pub fn schedule_improved(params: &CodeParams, channel: &ChannelModel) -> Result<Emissions> {
    Ok(Schedule::improved(params, channel)?.emissions(params))
}

/// Settings of the greedy optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Initial passes per segment.
    pub passes: usize,
    /// Target frame-error bound.
    pub delta: f64,
    /// Chernoff slack for the AWGN bound.
    pub eps: f64,
    /// Largest total number of symbols before giving up.
    pub cap: usize,
    pub execution: Execution,
}

impl OptimizerConfig {
    pub const DEFAULT_CAP: usize = 10_000;

    pub fn new(passes: usize, delta: f64) -> Self {
        Self {
            passes,
            delta,
            eps: crate::bounds::DEFAULT_EPS,
            cap: Self::DEFAULT_CAP,
            execution: Execution::default(),
        }
    }
}

/// One committed increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerStep {
    pub iteration: usize,
    /// 1-based segment whose count was incremented.
    pub index: usize,
    /// Bound after the increment.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub counts: Vec<usize>,
    pub total: usize,
    pub bound: f64,
    pub log: Vec<OptimizerStep>,
}

impl OptimizerState {
    /// The final counts as a plan emitted in descending segment order.
    pub fn plan(&self) -> TransmissionPlan {
        let s = self.counts.len();
        TransmissionPlan {
            counts: self.counts.clone(),
            order: (1..=s).rev().collect(),
            scheme: Scheme::Optimized,
        }
    }
}

fn plan_bound(params: &CodeParams, channel: &ChannelModel, counts: Vec<usize>, eps: f64) -> Result<BoundResult> {
    fer_bound_new(&BoundConfig::new(*params, *channel, counts, eps)?)
}

/// Bound value of every single-symbol increment among `allowed` segments,
/// then the winner: lowest bound, then lowest summed log2 union term (this
/// separates candidates whose clamped bounds are all saturated at 1), then
/// lowest index.
fn best_increment(
    params: &CodeParams,
    channel: &ChannelModel,
    counts: &[usize],
    allowed: &[usize],
    eps: f64,
    exec: Execution,
) -> Result<(usize, f64)> {
    let scored = try_map_indices(exec, allowed.len(), |a| {
        let mut trial = counts.to_vec();
        trial[allowed[a] - 1] += 1;
        let r = plan_bound(params, channel, trial, eps)?;
        Ok::<_, Error>((r.total, r.union_score(), allowed[a]))
    })?;
    let best = scored
        .into_iter()
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.cmp(&y.2)))
        .expect("at least one candidate");
    Ok((best.2, best.0))
}

/// Greedy minimisation of the frame-error bound: starting from `passes`
/// symbols per segment, add one symbol at a time to the segment whose
/// increment gives the lowest bound, until the bound is at most `delta`.
pub fn solve_min_fer(params: &CodeParams, channel: &ChannelModel, cfg: &OptimizerConfig) -> Result<OptimizerState> {
    if cfg.passes == 0 {
        return Err(Error::InvalidParams("initial passes must be at least 1".into()));
    }
    if !(cfg.delta > 0.0 && cfg.delta <= 1.0) {
        return Err(Error::InvalidParams(format!("delta must lie in (0, 1], got {}", cfg.delta)));
    }
    let s = params.segments();
    let mut counts = vec![cfg.passes; s];
    let mut total = cfg.passes * s;
    let mut bound = plan_bound(params, channel, counts.clone(), cfg.eps)?.total;
    let all: Vec<usize> = (1..=s).collect();
    let mut log = Vec::new();
    while bound > cfg.delta {
        if total + 1 > cfg.cap {
            return Err(Error::NoConvergence { cap: cfg.cap });
        }
        let (index, value) = best_increment(params, channel, &counts, &all, cfg.eps, cfg.execution)?;
        counts[index - 1] += 1;
        total += 1;
        bound = value;
        log.push(OptimizerStep {
            iteration: log.len() + 1,
            index,
            bound,
        });
    }
    Ok(OptimizerState {
        counts,
        total,
        bound,
        log,
    })
}

/// Runs the greedy step over one extra pass in which each segment may be
/// chosen once, starting from a single full pass. The chosen indices, in
/// order, form the intra-pass order.
pub fn derive_order(params: &CodeParams, channel: &ChannelModel, eps: f64) -> Result<Vec<usize>> {
    let s = params.segments();
    let mut counts = vec![1usize; s];
    let mut remaining: Vec<usize> = (1..=s).collect();
    let mut order = Vec::with_capacity(s);
    while !remaining.is_empty() {
        let (index, _) = best_increment(params, channel, &counts, &remaining, eps, Execution::Sequential)?;
        counts[index - 1] += 1;
        remaining.retain(|&g| g != index);
        order.push(index);
    }
    Ok(order)
}
