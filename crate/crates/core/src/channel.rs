//! Memoryless channels and capacity.
//!
//! SNR convention: the signal energy is the mean-removed average energy of the
//! uniform `2^c`-point integer grid, `(4^c - 1) / 12`, and `SNR = energy / sigma^2`.
//! Shifting the grid does not change any distance, so the mean carries no
//! information and is excluded.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::codec::mix64;
use crate::{CodeParams, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    /// Additive white Gaussian noise with variance `sigma2`.
    Awgn { sigma2: f64 },
    /// Binary symmetric channel with crossover probability `f`.
    Bsc { f: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub seed: u64,
}

/// Mean-removed average symbol energy of the uniform grid `[0, 2^c - 1]`.
pub fn grid_energy(params: &CodeParams) -> f64 {
    ((params.symbol_levels() as f64).powi(2) - 1.0) / 12.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `H2(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

impl ChannelModel {
    pub fn awgn(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidChannel(format!("sigma2 must be positive, got {sigma2}")));
        }
        Ok(Self {
            kind: ChannelKind::Awgn { sigma2 },
            seed: 0,
        })
    }

    /// AWGN channel at the given SNR (dB) for the grid of `params`.
    pub fn awgn_snr_db(snr_db: f64, params: &CodeParams) -> Result<Self> {
        Self::awgn(grid_energy(params) / db_to_linear(snr_db))
    }

    pub fn bsc(f: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&f) {
            return Err(Error::InvalidChannel(format!("crossover must lie in [0, 0.5], got {f}")));
        }
        Ok(Self {
            kind: ChannelKind::Bsc { f },
            seed: 0,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn is_awgn(&self) -> bool {
        matches!(self.kind, ChannelKind::Awgn { .. })
    }

    /// Linear SNR under the grid-energy convention; `None` for the BSC.
    pub fn snr(&self, params: &CodeParams) -> Option<f64> {
        match self.kind {
            ChannelKind::Awgn { sigma2 } => Some(grid_energy(params) / sigma2),
            ChannelKind::Bsc { .. } => None,
        }
    }

    /// Parses `awgn:sigma2=X`, `awgn:snr_db=X` or `bsc:f=Y`.
    pub fn parse(text: &str, params: &CodeParams) -> Result<Self> {
        let bad = || Error::InvalidChannel(format!("cannot parse channel '{text}'"));
        let (kind, rest) = text.trim().split_once(':').ok_or_else(bad)?;
        let (key, value) = rest.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        match (kind.trim().to_ascii_lowercase().as_str(), key.trim()) {
            ("awgn", "sigma2") => Self::awgn(value),
            ("awgn", "snr_db") => Self::awgn_snr_db(value, params),
            ("bsc", "f") => Self::bsc(value),
            _ => Err(bad()),
        }
    }

    /// Private noise stream for one trial.
    pub fn stream(&self, trial: u64) -> NoiseStream {
        NoiseStream {
            kind: self.kind,
            rng: ChaCha8Rng::seed_from_u64(mix64(self.seed ^ mix64(trial.wrapping_add(0x6e6f_6973_65)))),
        }
    }

    /// Passes coded symbol `(segment, pass)` of `trial` through the channel.
    /// The noise depends only on `(seed, trial, segment, pass)`, so schedules
    /// that send the same symbol in a different order see the same noise.
    pub fn transmit_symbol(&self, trial: u64, segment: usize, pass: usize, x: f64) -> Result<f64> {
        let key = mix64(mix64(self.seed ^ mix64(trial)) ^ ((segment as u64) << 32 | pass as u64));
        NoiseStream {
            kind: self.kind,
            rng: ChaCha8Rng::seed_from_u64(key),
        }
        .transmit(x)
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ChannelKind::Awgn { sigma2 } => write!(f, "awgn:sigma2={sigma2}"),
            ChannelKind::Bsc { f: p } => write!(f, "bsc:f={p}"),
        }
    }
}

/// Seeded noise source owned by a single trial.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    kind: ChannelKind,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    /// Passes one channel input through the channel. BSC inputs must be 0 or 1.
    pub fn transmit(&mut self, x: f64) -> Result<f64> {
        match self.kind {
            ChannelKind::Awgn { sigma2 } => {
                let z: f64 = self.rng.sample(StandardNormal);
                Ok(x + sigma2.sqrt() * z)
            }
            ChannelKind::Bsc { f } => {
                if x != 0.0 && x != 1.0 {
                    return Err(Error::KindMismatch(format!("BSC input must be a bit, got {x}")));
                }
                let flip = self.rng.random::<f64>() < f;
                Ok(if flip { 1.0 - x } else { x })
            }
        }
    }

    /// Access to the trial's generator, e.g. for drawing the message.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Capacity in bits per channel use: `1 - H2(f)` for the BSC, and
/// `min(c, log2(1 + SNR) / 2)` for AWGN.
pub fn capacity(ch: &ChannelModel, params: &CodeParams) -> f64 {
    match ch.kind {
        ChannelKind::Bsc { f } => 1.0 - binary_entropy(f),
        ChannelKind::Awgn { .. } => {
            let snr = ch.snr(params).expect("awgn");
            (0.5 * (1.0 + snr).log2()).min(params.c() as f64)
        }
    }
}
