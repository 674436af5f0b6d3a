//! Settings merged from a `key=value` file and command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;

use spinal_core::bounds::{BoundKind, DEFAULT_EPS};
use spinal_core::channel::ChannelModel;
use spinal_core::experiment::{DecoderKind, ExperimentSpec, TimeoutPolicy};
use spinal_core::par::Execution;
use spinal_core::schedule::Scheme;
use spinal_core::CodeParams;
use spinal_core::DEFAULT_SALT;

/// Keys accepted in a config file. Flags use the same names.
pub const KEYS: [&str; 21] = [
    "n", "k", "c", "v", "B", "salt", "channel", "scheme", "decoder", "trials", "seed", "passes", "eps", "delta",
    "r", "bound", "cap", "timeouts", "out", "plan_out", "sequential",
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid value for '{key}': {message}")]
    Value { key: String, message: String },
    #[error(transparent)]
    Core(#[from] spinal_core::Error),
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Plain `key=value` config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Message length in bits.
    #[arg(long, global = true)]
    pub n: Option<String>,
    /// Bits per segment.
    #[arg(long, global = true)]
    pub k: Option<String>,
    /// Bits per coded symbol.
    #[arg(long, global = true)]
    pub c: Option<String>,
    /// Spine width in bits.
    #[arg(long, global = true)]
    pub v: Option<String>,
    /// Beam width.
    #[arg(long = "B", global = true)]
    pub beam: Option<String>,
    /// Hash salt (decimal or 0x-prefixed hex).
    #[arg(long, global = true)]
    pub salt: Option<String>,
    /// Channel point(s): `awgn:sigma2=X`, `awgn:snr_db=X` or `bsc:f=Y`.
    /// Repeat the flag or separate points with ';' for a sweep.
    #[arg(long, global = true)]
    pub channel: Vec<String>,
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// ml, bubble or bdm.
    #[arg(long, global = true)]
    pub decoder: Option<String>,
    #[arg(long, global = true)]
    pub trials: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Passes per segment for fixed-plan runs and bound sweeps.
    #[arg(long, global = true)]
    pub passes: Option<String>,
    /// Chernoff slack of the AWGN bound.
    #[arg(long, global = true)]
    pub eps: Option<String>,
    /// Target frame-error bound of the optimizer.
    #[arg(long, global = true)]
    pub delta: Option<String>,
    /// Initial passes of the optimizer.
    #[arg(long, global = true)]
    pub r: Option<String>,
    /// `tight` (default) or `exponent` to pick per channel, or one of
    /// awgn-exponent, bsc-exponent, awgn-ball, bsc-union.
    #[arg(long, global = true)]
    pub bound: Option<String>,
    /// Symbol cap per rateless trial (also the optimizer's cap).
    #[arg(long, global = true)]
    pub cap: Option<String>,
    /// `error` aborts a rateless run when a trial hits the cap; `count`
    /// records it as a failure with rate 0.
    #[arg(long, global = true)]
    pub timeouts: Option<String>,
    /// CSV output path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Plan file written by `optimize`.
    #[arg(long = "plan-out", global = true)]
    pub plan_out: Option<PathBuf>,
    /// Run trials on the calling thread only.
    #[arg(long, global = true)]
    pub sequential: bool,
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            message: format!("expected key=value, got '{line}'"),
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                message: format!("unknown key '{key}'"),
            });
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_u64(text: &str) -> Option<u64> {
    match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16).ok(),
        None => text.replace('_', "").parse().ok(),
    }
}

/// Bound family requested with `--bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundChoice {
    Tight,
    Exponent,
    Fixed(BoundKind),
}

impl BoundChoice {
    pub fn kind_for(&self, channel: &ChannelModel) -> BoundKind {
        match self {
            Self::Tight => BoundKind::for_channel(channel, true),
            Self::Exponent => BoundKind::for_channel(channel, false),
            Self::Fixed(kind) => *kind,
        }
    }
}

impl std::str::FromStr for BoundChoice {
    type Err = spinal_core::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "tight" => Ok(Self::Tight),
            "exponent" => Ok(Self::Exponent),
            other => other.parse().map(Self::Fixed),
        }
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub spec: ExperimentSpec,
    pub delta: f64,
    pub initial_passes: usize,
    pub bound: BoundChoice,
    pub out: Option<PathBuf>,
    pub plan_out: Option<PathBuf>,
}

struct Resolver {
    file: BTreeMap<String, String>,
    flags: BTreeMap<&'static str, String>,
}

impl Resolver {
    fn raw(&self, key: &str) -> Option<&str> {
        self.flags.get(key).or_else(|| self.file.get(key)).map(String::as_str)
    }

    fn get<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>) -> Result<T, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(text) => parse(text).ok_or_else(|| ConfigError::Value {
                key: key.into(),
                message: format!("cannot parse '{text}'"),
            }),
        }
    }

    fn num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        self.get(key, default, |s| s.replace('_', "").parse().ok())
    }
}

impl Flags {
    fn explicit(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        let pairs: [(&'static str, &Option<String>); 17] = [
            ("n", &self.n),
            ("k", &self.k),
            ("c", &self.c),
            ("v", &self.v),
            ("B", &self.beam),
            ("salt", &self.salt),
            ("scheme", &self.scheme),
            ("decoder", &self.decoder),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("passes", &self.passes),
            ("eps", &self.eps),
            ("delta", &self.delta),
            ("r", &self.r),
            ("bound", &self.bound),
            ("cap", &self.cap),
            ("timeouts", &self.timeouts),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                m.insert(key, v.clone());
            }
        }
        if !self.channel.is_empty() {
            m.insert("channel", self.channel.join(";"));
        }
        if let Some(p) = &self.out {
            m.insert("out", p.display().to_string());
        }
        if let Some(p) = &self.plan_out {
            m.insert("plan_out", p.display().to_string());
        }
        if self.sequential {
            m.insert("sequential", "true".into());
        }
        m
    }

    /// Merges the config file (if any) under the explicit flags.
    pub fn resolve(&self) -> Result<Settings, ConfigError> {
        let file = match &self.config {
            Some(path) => parse_config(&read(path)?)?,
            None => BTreeMap::new(),
        };
        let r = Resolver {
            file,
            flags: self.explicit(),
        };
        let params = CodeParams::new(
            r.num("n", 32)?,
            r.num("k", 4)?,
            r.num("c", 8)?,
            r.num("v", 32)?,
            r.num("B", 16)?,
        )?
        .with_salt(r.get("salt", DEFAULT_SALT, parse_u64)?);
        let channels = r
            .raw("channel")
            .unwrap_or("awgn:snr_db=10")
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| ChannelModel::parse(s, &params))
            .collect::<Result<Vec<_>, _>>()?;
        let sequential = r.get("sequential", false, |s| s.parse().ok())?;
        let spec = ExperimentSpec {
            scheme: r.get("scheme", Scheme::Improved, |s| s.parse().ok())?,
            decoder: r.get("decoder", DecoderKind::Bubble, |s| s.parse().ok())?,
            trials: r.num("trials", 1000)?,
            seed: r.get("seed", 1, parse_u64)?,
            passes: r.num("passes", 8)?,
            eps: r.num("eps", DEFAULT_EPS)?,
            symbol_cap: r.num("cap", ExperimentSpec::DEFAULT_SYMBOL_CAP)?,
            on_timeout: r.get("timeouts", TimeoutPolicy::Error, |s| match s {
                "error" => Some(TimeoutPolicy::Error),
                "count" => Some(TimeoutPolicy::CountFailure),
                _ => None,
            })?,
            execution: if sequential { Execution::Sequential } else { Execution::default() },
            ..ExperimentSpec::new(params, channels)
        };
        spec.validate()?;
        let delta = r.num("delta", 1e-5)?;
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(ConfigError::Value {
                key: "delta".into(),
                message: format!("must lie in (0, 1], got {delta}"),
            });
        }
        if !(spec.eps > 0.0) {
            return Err(ConfigError::Value {
                key: "eps".into(),
                message: "must be positive".into(),
            });
        }
        Ok(Settings {
            delta,
            initial_passes: r.num("r", 3)?,
            bound: r.get("bound", BoundChoice::Tight, |s| s.parse().ok())?,
            out: r.raw("out").map(PathBuf::from),
            plan_out: r.raw("plan_out").map(PathBuf::from),
            spec,
        })
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}
