//! Monte-Carlo campaigns: fixed-plan frame error rates, rateless rates,
//! decoding cost, bound sweeps and optimizer runs.
//!
//! Every trial derives its message and noise from `(seed, point, trial)`, and
//! the noise of a coded symbol depends only on its `(segment, pass)` index.
//! Different schemes and decoders therefore face the same messages and the
//! same noise realisations at a given sweep point, and results do not depend
//! on the execution mode.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{self, BoundKind};
use crate::channel::ChannelModel;
use crate::codec::{mix64, Encoder, Message};
use crate::decode::{bubble_decode, ledger_account, ml_decode, BdmDecoder, LedgerMode, Metric, OpModel, ReceivedSet};
use crate::par::{try_map_indices, Execution};
use crate::schedule::{solve_min_fer, OptimizerConfig, OptimizerState, Schedule, Scheme, TransmissionPlan};
use crate::{CodeParams, Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Ml,
    /// Bubble decoding rebuilt from scratch at every attempt.
    Bubble,
    /// Bubble decoding with memory.
    Bdm,
}

impl DecoderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ml => "ml",
            Self::Bubble => "bubble",
            Self::Bdm => "bdm",
        }
    }

    /// Ledger mode charged for this decoder.
    pub fn ledger_mode(&self) -> LedgerMode {
        match self {
            Self::Bdm => LedgerMode::Memory,
            _ => LedgerMode::Rebuild,
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ml" => Ok(Self::Ml),
            "bubble" | "rebuild" => Ok(Self::Bubble),
            "bdm" | "memory" => Ok(Self::Bdm),
            _ => Err(Error::Parse(format!("unknown decoder '{s}'"))),
        }
    }
}

/// What a rateless run does when a trial reaches the symbol cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeoutPolicy {
    /// Abort the run with [`Error::Timeout`].
    #[default]
    Error,
    /// Count the trial as a failure with rate 0. Its ops and wall-clock up to
    /// the cap are still recorded.
    CountFailure,
}

impl fmt::Display for TimeoutPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Error => "error",
            Self::CountFailure => "count",
        })
    }
}

/// One campaign over a sweep of channel points.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub params: CodeParams,
    pub channels: Vec<ChannelModel>,
    pub scheme: Scheme,
    pub decoder: DecoderKind,
    pub trials: usize,
    pub seed: u64,
    /// Passes per segment for fixed-plan runs and bound sweeps.
    pub passes: usize,
    pub eps: f64,
    /// Largest number of symbols a rateless trial may use.
    pub symbol_cap: usize,
    pub on_timeout: TimeoutPolicy,
    pub model: OpModel,
    pub execution: Execution,
}

impl ExperimentSpec {
    pub const DEFAULT_SYMBOL_CAP: usize = 10_000;

    pub fn new(params: CodeParams, channels: Vec<ChannelModel>) -> Self {
        Self {
            params,
            channels,
            scheme: Scheme::PassByPass,
            decoder: DecoderKind::Bubble,
            trials: 1000,
            seed: 1,
            passes: 8,
            eps: bounds::DEFAULT_EPS,
            symbol_cap: Self::DEFAULT_SYMBOL_CAP,
            on_timeout: TimeoutPolicy::Error,
            model: OpModel::default(),
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::InvalidParams("channel sweep is empty".into()));
        }
        if self.passes == 0 {
            return Err(Error::InvalidParams("passes must be at least 1".into()));
        }
        Ok(())
    }

    /// Stable text form of every field that affects results.
    pub fn canonical(&self) -> String {
        let p = &self.params;
        let channels: Vec<String> = self.channels.iter().map(ToString::to_string).collect();
        format!(
            "n={};k={};c={};v={};salt={:#x};B={};channels={};scheme={};decoder={};trials={};seed={};passes={};eps={};cap={};timeouts={};regen={}",
            p.n(),
            p.k(),
            p.c(),
            p.v(),
            p.salt(),
            p.beam(),
            channels.join(","),
            self.scheme,
            self.decoder,
            self.trials,
            self.seed,
            self.passes,
            self.eps,
            self.symbol_cap,
            self.on_timeout,
            self.model.regenerations
        )
    }

    fn point_seed(&self, point: usize) -> u64 {
        mix64(self.seed ^ mix64(point as u64 ^ 0x706f_696e_74))
    }

    fn channel_at(&self, point: usize) -> ChannelModel {
        self.channels[point].with_seed(self.point_seed(point))
    }

    fn message(&self, point: usize, trial: usize) -> Message {
        let seed = mix64(self.point_seed(point) ^ mix64((trial as u64).wrapping_add(0x6d65_7373)));
        Message::random(&mut ChaCha8Rng::seed_from_u64(seed), &self.params)
    }
}

/// Outcome of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub channel: ChannelModel,
    pub scheme: Scheme,
    pub decoder: DecoderKind,
    pub trials: usize,
    /// Frame errors (fixed plans) or timed-out trials (rateless runs).
    pub failures: usize,
    /// `n / symbols at acknowledgement`, one per trial (rateless runs).
    pub rates: Vec<f64>,
    /// Ledger total per trial.
    pub ops: Vec<f64>,
    /// Decoding wall-clock per trial, in seconds.
    pub wall: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Standard error of the mean.
fn std_error(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (var / v.len() as f64).sqrt()
}

/// Wilson score interval for `failures` out of `trials` at normal quantile `z`.
pub fn wilson_interval(failures: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if failures == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

impl TrialRecord {
    pub fn fer(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    pub fn wilson(&self) -> (f64, f64) {
        wilson_interval(self.failures, self.trials, Z95)
    }

    pub fn mean_rate(&self) -> f64 {
        mean(&self.rates)
    }

    pub fn rate_std_error(&self) -> f64 {
        std_error(&self.rates)
    }

    pub fn mean_ops(&self) -> f64 {
        mean(&self.ops)
    }

    pub fn mean_wall(&self) -> f64 {
        mean(&self.wall)
    }
}

fn decode_once(decoder: DecoderKind, recv: &ReceivedSet, params: &CodeParams) -> Result<Message> {
    match decoder {
        DecoderKind::Ml => ml_decode(recv, params),
        DecoderKind::Bubble | DecoderKind::Bdm => bubble_decode(recv, params),
    }
}

/// Fixed-plan runs: every trial sends `passes` symbols for each segment and
/// decodes once.
pub fn run_fer_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let params = &spec.params;
    let plan = TransmissionPlan::uniform(params, spec.passes, Scheme::PassByPass);
    (0..spec.channels.len())
        .map(|point| {
            let channel = spec.channel_at(point);
            let metric = Metric::for_channel(&channel);
            let outcomes = try_map_indices(spec.execution, spec.trials, |trial| {
                let msg = spec.message(point, trial);
                let enc = Encoder::new(&msg, params);
                let mut recv = ReceivedSet::new(params, metric);
                for (i, &l) in plan.counts().iter().enumerate() {
                    for j in 1..=l {
                        let y = channel.transmit_symbol(trial as u64, i + 1, j, enc.symbol(i + 1, j).mapped)?;
                        recv.push(i + 1, j, y)?;
                    }
                }
                Ok::<_, Error>(decode_once(spec.decoder, &recv, params)? != msg)
            })?;
            Ok(TrialRecord {
                channel: spec.channels[point],
                scheme: Scheme::PassByPass,
                decoder: spec.decoder,
                trials: spec.trials,
                failures: outcomes.iter().filter(|&&failed| failed).count(),
                rates: Vec::new(),
                ops: Vec::new(),
                wall: Vec::new(),
            })
        })
        .collect()
}

/// Result of one rateless trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RatelessTrial {
    /// False when the trial stopped at the symbol cap.
    pub acknowledged: bool,
    pub symbols: usize,
    pub counts: Vec<usize>,
    pub attempts: usize,
    pub wall: f64,
}

/// Streams symbols of `schedule` until the decoder returns the transmitted
/// message (genie acknowledgement).
pub fn run_rateless_trial(
    params: &CodeParams,
    channel: &ChannelModel,
    schedule: &Schedule,
    decoder: DecoderKind,
    msg: &Message,
    trial: u64,
    cap: usize,
) -> Result<RatelessTrial> {
    let t = stream_trial(params, channel, schedule, decoder, msg, trial, cap)?;
    if t.acknowledged {
        Ok(t)
    } else {
        Err(Error::Timeout { cap })
    }
}

fn stream_trial(
    params: &CodeParams,
    channel: &ChannelModel,
    schedule: &Schedule,
    decoder: DecoderKind,
    msg: &Message,
    trial: u64,
    cap: usize,
) -> Result<RatelessTrial> {
    let enc = Encoder::new(msg, params);
    let metric = Metric::for_channel(channel);
    let mut bdm = BdmDecoder::new(params, metric, OpModel::default());
    let mut recv = ReceivedSet::new(params, metric);
    let mut emissions = schedule.emissions(params);
    let mut attempts = 0;
    let mut wall = 0.0;
    loop {
        if emissions.emitted() >= cap {
            return Ok(RatelessTrial {
                acknowledged: false,
                symbols: emissions.emitted(),
                counts: emissions.counts().to_vec(),
                attempts,
                wall,
            });
        }
        let (segment, pass) = emissions.next().expect("schedules never end");
        let sent = emissions.emitted();
        let y = channel.transmit_symbol(trial, segment, pass, enc.symbol(segment, pass).mapped)?;
        match decoder {
            DecoderKind::Bdm => bdm.push(segment, pass, y)?,
            _ => recv.push(segment, pass, y)?,
        }
        if !schedule.decode_point(sent, params) {
            continue;
        }
        attempts += 1;
        let start = Instant::now();
        let decoded = match decoder {
            DecoderKind::Bdm => bdm.decode()?,
            _ => Some(decode_once(decoder, &recv, params)?),
        };
        wall += start.elapsed().as_secs_f64();
        if decoded.as_ref() == Some(msg) {
            return Ok(RatelessTrial {
                acknowledged: true,
                symbols: sent,
                counts: emissions.counts().to_vec(),
                attempts,
                wall,
            });
        }
    }
}

fn rateless_point(spec: &ExperimentSpec, point: usize, scheme: Scheme, decoder: DecoderKind) -> Result<TrialRecord> {
    let params = &spec.params;
    let channel = spec.channel_at(point);
    let schedule = Schedule::for_scheme(scheme, params, &channel)?;
    let trials = try_map_indices(spec.execution, spec.trials, |trial| {
        let msg = spec.message(point, trial);
        let t = stream_trial(params, &channel, &schedule, decoder, &msg, trial as u64, spec.symbol_cap)?;
        if !t.acknowledged && spec.on_timeout == TimeoutPolicy::Error {
            return Err(Error::Timeout { cap: spec.symbol_cap });
        }
        let ops = ledger_account(&t.counts, params, decoder.ledger_mode(), &spec.model)?.total;
        let rate = if t.acknowledged { params.n() as f64 / t.symbols as f64 } else { 0.0 };
        Ok((t.acknowledged, rate, ops, t.wall))
    })?;
    Ok(TrialRecord {
        channel: spec.channels[point],
        scheme,
        decoder,
        trials: spec.trials,
        failures: trials.iter().filter(|t| !t.0).count(),
        rates: trials.iter().map(|t| t.1).collect(),
        ops: trials.iter().map(|t| t.2).collect(),
        wall: trials.iter().map(|t| t.3).collect(),
    })
}

/// Rateless runs of `spec.scheme` with `spec.decoder`, one record per point.
pub fn run_rate_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    (0..spec.channels.len())
        .map(|point| rateless_point(spec, point, spec.scheme, spec.decoder))
        .collect()
}

/// The scheme/decoder pairs compared by [`run_cost_experiment`]; the first is
/// the normalisation baseline.
pub const COST_PAIRS: [(Scheme, DecoderKind); 4] = [
    (Scheme::UniformPuncturing, DecoderKind::Bubble),
    (Scheme::UniformPuncturing, DecoderKind::Bdm),
    (Scheme::Improved, DecoderKind::Bubble),
    (Scheme::Improved, DecoderKind::Bdm),
];

/// Decoding cost of one scheme/decoder pair at one point, normalised to the
/// first pair of the same point.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub record: TrialRecord,
    pub normalized_ops: f64,
    pub normalized_wall: f64,
}

pub fn run_cost_experiment(spec: &ExperimentSpec, pairs: &[(Scheme, DecoderKind)]) -> Result<Vec<CostRow>> {
    spec.validate()?;
    if pairs.is_empty() {
        return Err(Error::InvalidParams("no scheme/decoder pairs".into()));
    }
    let mut rows = Vec::new();
    for point in 0..spec.channels.len() {
        let records = pairs
            .iter()
            .map(|&(scheme, decoder)| rateless_point(spec, point, scheme, decoder))
            .collect::<Result<Vec<_>>>()?;
        let base_ops = records[0].mean_ops();
        let base_wall = records[0].mean_wall();
        rows.extend(records.into_iter().map(|record| CostRow {
            normalized_ops: record.mean_ops() / base_ops,
            normalized_wall: record.mean_wall() / base_wall,
            record,
        }));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub channel: ChannelModel,
    pub kind: BoundKind,
    pub value: f64,
}

/// Evaluates `kind` with `spec.passes` uniform passes at every sweep point.
pub fn run_bounds_sweep(spec: &ExperimentSpec, kind: BoundKind) -> Result<Vec<BoundRow>> {
    spec.validate()?;
    spec.channels
        .iter()
        .map(|ch| {
            let r = bounds::evaluate(kind, &spec.params, ch, spec.passes, spec.eps)?;
            Ok(BoundRow {
                channel: *ch,
                kind,
                value: r.total,
            })
        })
        .collect()
}

/// Runs the plan optimizer at every sweep point.
pub fn run_optimizer(spec: &ExperimentSpec, passes: usize, delta: f64) -> Result<Vec<(ChannelModel, OptimizerState)>> {
    spec.validate()?;
    let cfg = OptimizerConfig {
        eps: spec.eps,
        execution: spec.execution,
        ..OptimizerConfig::new(passes, delta)
    };
    spec.channels
        .iter()
        .map(|ch| Ok((*ch, solve_min_fer(&spec.params, ch, &cfg)?)))
        .collect()
}
