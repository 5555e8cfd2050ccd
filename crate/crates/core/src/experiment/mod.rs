//! Configured experiment runs and parameter sweeps that write CSV/JSON artifacts.
//!
//! A run computes every artifact in memory first, so validation or numerical
//! failures leave the output directory untouched; files are then written
//! atomically, followed by a `run.json` record that can be fed back as a
//! config.

pub mod config;
pub mod runners;
pub mod sweep;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

pub use config::{
    ExperimentConfig, ExperimentKind, ParamValue, RawConfig, DEFAULT_MAX_CELLS, DEFAULT_OUTPUT_DIR,
};
pub use runners::{execute, summary_keys, Artifact, FitRecord, RunOutput};
pub use sweep::{sweep, SweepConfig, SweepRecord};

use crate::error::Result;
use crate::io::write_atomic;

pub const RUN_RECORD: &str = "run.json";

/// What a run leaves behind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub config: RawConfig,
    pub artifacts: Vec<String>,
    pub wall_time_s: f64,
    pub version: String,
    pub fits: Vec<FitRecord>,
    pub summary: BTreeMap<String, f64>,
}

/// Runs `config` and writes its artifacts and `run.json` under `output_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let out = execute(config)?;
    write_run(config, &out, start.elapsed().as_secs_f64())
}

pub(crate) fn write_run(config: &ExperimentConfig, out: &RunOutput, wall_time_s: f64) -> Result<RunRecord> {
    let artifacts = write_artifacts(&config.output_dir, &out.artifacts)?;
    let record = RunRecord {
        config: config.to_raw(),
        artifacts,
        wall_time_s,
        version: env!("CARGO_PKG_VERSION").to_string(),
        fits: out.fits.clone(),
        summary: out.summary.iter().cloned().collect(),
    };
    write_json(&config.output_dir.join(RUN_RECORD), &record)?;
    Ok(record)
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            write_atomic(&dir.join(&a.name), &a.bytes)?;
            Ok(a.name.clone())
        })
        .collect()
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)?;
    Ok(())
}

/// Builds a resolved config from an optional file, `key=value` overrides
/// and explicit flags (flags win over overrides, which win over the file).
pub fn build_config(
    file: Option<&Path>,
    experiment: Option<ExperimentKind>,
    overrides: &[String],
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    default_output: &Path,
) -> Result<RawConfig> {
    let mut raw = match file {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    for o in overrides {
        raw.apply_override(o)?;
    }
    if let Some(kind) = experiment {
        match raw.experiment {
            Some(k) if k != kind => {
                return Err(crate::Error::InvalidArgument(format!(
                    "config is for `{k}` but `{kind}` was requested"
                )))
            }
            _ => raw.experiment = Some(kind),
        }
    }
    if seed.is_some() {
        raw.seed = seed;
    }
    if output_dir.is_some() {
        raw.output_dir = output_dir;
    }
    if raw.output_dir.is_none() {
        raw.output_dir = Some(default_output.to_path_buf());
    }
    Ok(raw)
}
