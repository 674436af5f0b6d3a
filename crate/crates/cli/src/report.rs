//! CSV writers. Every row ends with the hash of the settings that produced it.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use spinal_core::bounds::BoundKind;
use spinal_core::channel::{linear_to_db, ChannelModel};
use spinal_core::experiment::{CostRow, ExperimentSpec, TrialRecord};
use spinal_core::schedule::OptimizerState;

use crate::config::Settings;
use crate::RunError;

/// First 16 hex digits of the SHA-256 of the command and its resolved settings.
pub fn spec_hash(command: &str, settings: &Settings) -> String {
    let text = format!(
        "{command};{};delta={};r={};bound={:?}",
        settings.spec.canonical(),
        settings.delta,
        settings.initial_passes,
        settings.bound
    );
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// `plan.txt` becomes `plan.2.txt` for the third channel point.
pub fn indexed_path(path: &Path, idx: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("plan");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}.{idx}.{ext}"),
        None => format!("{stem}.{idx}"),
    };
    path.with_file_name(name)
}

pub struct Sink {
    writer: csv::Writer<Box<dyn Write>>,
    path: Option<PathBuf>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, RunError> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(File::create(p).map_err(|source| RunError::Io {
                path: p.display().to_string(),
                source,
            })?),
            None => Box::new(io::stdout().lock()),
        };
        Ok(Self {
            writer: csv::Writer::from_writer(inner),
            path: path.map(Path::to_path_buf),
        })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<(), RunError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        Ok(self.writer.write_record(fields)?)
    }

    pub fn finish(mut self) -> Result<(), RunError> {
        self.writer.flush().map_err(|source| RunError::Io {
            path: self
                .path
                .as_ref()
                .map_or_else(|| "stdout".into(), |p| p.display().to_string()),
            source,
        })
    }
}

/// dB value rounded to 10 decimals so `snr_db=6` reads back as `6`.
fn snr_db(ch: &ChannelModel, spec: &ExperimentSpec) -> String {
    ch.snr(&spec.params)
        .map(|s| {
            let text = format!("{:.10}", linear_to_db(s));
            let text = text.trim_end_matches('0').trim_end_matches('.');
            if text == "-0" { "0".to_string() } else { text.to_string() }
        })
        .unwrap_or_default()
}

pub fn bounds(out: &mut Sink, spec: &ExperimentSpec, rows: &[(ChannelModel, BoundKind, f64)], hash: &str) -> Result<(), RunError> {
    out.row(["channel", "snr_db", "passes", "bound", "value", "spec_hash"])?;
    for (ch, kind, value) in rows {
        out.row([
            ch.to_string(),
            snr_db(ch, spec),
            spec.passes.to_string(),
            kind.to_string(),
            value.to_string(),
            hash.to_string(),
        ])?;
    }
    Ok(())
}

pub fn optimizer(out: &mut Sink, states: &[(ChannelModel, OptimizerState)], hash: &str) -> Result<(), RunError> {
    out.row(["channel", "iteration", "index", "bound", "total", "spec_hash"])?;
    for (ch, state) in states {
        let base = state.total - state.log.len();
        for step in &state.log {
            out.row([
                ch.to_string(),
                step.iteration.to_string(),
                step.index.to_string(),
                step.bound.to_string(),
                (base + step.iteration).to_string(),
                hash.to_string(),
            ])?;
        }
    }
    Ok(())
}

pub fn fer(out: &mut Sink, spec: &ExperimentSpec, records: &[TrialRecord], hash: &str) -> Result<(), RunError> {
    out.row([
        "channel", "snr_db", "decoder", "passes", "trials", "failures", "fer", "ci_low", "ci_high", "spec_hash",
    ])?;
    for r in records {
        let (lo, hi) = r.wilson();
        out.row([
            r.channel.to_string(),
            snr_db(&r.channel, spec),
            r.decoder.to_string(),
            spec.passes.to_string(),
            r.trials.to_string(),
            r.failures.to_string(),
            r.fer().to_string(),
            lo.to_string(),
            hi.to_string(),
            hash.to_string(),
        ])?;
    }
    Ok(())
}

pub fn rate(out: &mut Sink, spec: &ExperimentSpec, records: &[TrialRecord], hash: &str) -> Result<(), RunError> {
    out.row([
        "channel", "snr_db", "scheme", "decoder", "trials", "timeouts", "mean_rate", "rate_stderr", "mean_ops",
        "spec_hash",
    ])?;
    for r in records {
        out.row([
            r.channel.to_string(),
            snr_db(&r.channel, spec),
            r.scheme.to_string(),
            r.decoder.to_string(),
            r.trials.to_string(),
            r.failures.to_string(),
            r.mean_rate().to_string(),
            r.rate_std_error().to_string(),
            r.mean_ops().to_string(),
            hash.to_string(),
        ])?;
    }
    Ok(())
}

/// Wall-clock columns vary between runs; everything else is deterministic.
pub fn cost(out: &mut Sink, spec: &ExperimentSpec, rows: &[CostRow], hash: &str) -> Result<(), RunError> {
    out.row([
        "channel", "snr_db", "scheme", "decoder", "trials", "timeouts", "mean_ops", "norm_ops", "mean_wall_s",
        "norm_wall", "spec_hash",
    ])?;
    for row in rows {
        let r = &row.record;
        out.row([
            r.channel.to_string(),
            snr_db(&r.channel, spec),
            r.scheme.to_string(),
            r.decoder.to_string(),
            r.trials.to_string(),
            r.failures.to_string(),
            r.mean_ops().to_string(),
            row.normalized_ops.to_string(),
            r.mean_wall().to_string(),
            row.normalized_wall.to_string(),
            hash.to_string(),
        ])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexed_paths_keep_the_extension() {
        assert_eq!(indexed_path(Path::new("out/plan.txt"), 2), PathBuf::from("out/plan.2.txt"));
        assert_eq!(indexed_path(Path::new("plan"), 0), PathBuf::from("plan.0"));
    }
}
