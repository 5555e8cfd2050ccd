use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{resolve_params, ExperimentConfig, ParamValue, RawConfig, DEFAULT_MAX_CELLS};
use super::runners::{execute, summary_keys, FitRecord, RunOutput};
use super::{write_json, write_run};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_atomic, CsvTable};
use crate::rng::derive_seed;

pub const SWEEP_RECORD: &str = "sweep.json";
pub const AGGREGATE_CSV: &str = "aggregate.csv";

/// A cartesian grid of runs around a base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    /// Axes in name order; each value already checked against the schema.
    pub axes: Vec<(String, Vec<ParamValue>)>,
    pub replicates: usize,
    pub max_cells: usize,
}

/// One point of the grid together with its derived seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub replicate: usize,
    pub seed: u64,
    pub values: Vec<ParamValue>,
}

impl SweepConfig {
    pub fn resolve(raw: &RawConfig, default_output: &Path) -> Result<Self> {
        let base = ExperimentConfig::resolve(raw, default_output)?;
        let mut axes = Vec::with_capacity(raw.grid.len());
        for (name, v) in &raw.grid {
            let def = base.experiment.param(name).ok_or_else(|| {
                Error::invalid(format!("unknown grid parameter `{name}` for {}", base.experiment))
            })?;
            let values = match v {
                ParamValue::List(xs) if !xs.is_empty() => xs.clone(),
                ParamValue::List(_) => {
                    return Err(Error::invalid(format!("grid axis `{name}` is empty")))
                }
                scalar => vec![scalar.clone()],
            };
            for x in &values {
                def.coerce(x)?;
            }
            axes.push((name.clone(), values));
        }
        let replicates = raw.replicates.unwrap_or(1);
        if replicates == 0 {
            return Err(Error::invalid("replicates must be >= 1"));
        }
        let s = SweepConfig {
            base,
            axes,
            replicates,
            max_cells: raw.max_cells.unwrap_or(DEFAULT_MAX_CELLS),
        };
        let n = s.n_cells();
        if n > s.max_cells {
            return Err(Error::Capacity(format!(
                "sweep has {n} cells, above the cap of {}",
                s.max_cells
            )));
        }
        Ok(s)
    }

    pub fn n_cells(&self) -> usize {
        self.axes
            .iter()
            .map(|(_, v)| v.len())
            .fold(self.replicates, |a, b| a.saturating_mul(b))
    }

    /// Cells in grid order: first axis slowest, replicates fastest.
    pub fn cells(&self) -> Vec<Cell> {
        let n = self.n_cells();
        (0..n)
            .map(|index| {
                let replicate = index % self.replicates;
                let mut rest = index / self.replicates;
                let mut values = vec![ParamValue::Int(0); self.axes.len()];
                for (k, (_, axis)) in self.axes.iter().enumerate().rev() {
                    values[k] = axis[rest % axis.len()].clone();
                    rest /= axis.len();
                }
                Cell {
                    index,
                    replicate,
                    seed: derive_seed(self.base.seed, index as u64),
                    values,
                }
            })
            .collect()
    }

    /// The stand-alone run configuration of one cell.
    pub fn cell_config(&self, cell: &Cell) -> Result<ExperimentConfig> {
        let mut params = self.base.params.clone();
        for ((name, _), v) in self.axes.iter().zip(&cell.values) {
            params.insert(name.clone(), v.clone());
        }
        Ok(ExperimentConfig {
            experiment: self.base.experiment,
            seed: cell.seed,
            output_dir: self.base.output_dir.join(cell_dir_name(cell.index)),
            params: resolve_params(self.base.experiment, &params)?,
        })
    }

    pub fn to_raw(&self) -> RawConfig {
        RawConfig {
            grid: self
                .axes
                .iter()
                .map(|(k, v)| (k.clone(), ParamValue::List(v.clone())))
                .collect(),
            replicates: Some(self.replicates),
            max_cells: Some(self.max_cells),
            ..self.base.to_raw()
        }
    }
}

pub fn cell_dir_name(index: usize) -> PathBuf {
    PathBuf::from("cells").join(format!("cell_{index:05}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub cell: usize,
    pub kind: String,
    pub message: String,
    #[serde(skip)]
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub config: RawConfig,
    pub n_cells: usize,
    pub failures: Vec<CellFailure>,
    pub artifacts: Vec<String>,
    pub fits: Vec<FitRecord>,
    pub wall_time_s: f64,
    pub version: String,
}

impl SweepRecord {
    /// `0` when every cell succeeded, else the exit code of the first failure.
    pub fn exit_code(&self) -> i32 {
        self.failures.first().map_or(0, |f| f.exit_code)
    }
}

fn axis_text(v: &ParamValue) -> String {
    match v {
        ParamValue::Int(i) => i.to_string(),
        ParamValue::Float(x) => fmt_f64(*x),
        ParamValue::Text(s) => s.clone(),
        ParamValue::List(xs) => xs.iter().map(axis_text).collect::<Vec<_>>().join(";"),
    }
}

fn sanitize(msg: &str) -> String {
    msg.chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' => ' ',
            c => c,
        })
        .collect()
}

/// Fit targets when `N` is a grid axis.
fn n_fit_targets(kind: super::ExperimentKind) -> &'static [&'static str] {
    use super::ExperimentKind::*;
    match kind {
        OverlapScan => &["log_abs_r"],
        DoubleSlit => &["log_visibility", "log_abs_r"],
        Measure => &["log_abs_rho_ud"],
        _ => &[],
    }
}

fn n_value(v: &ParamValue) -> Option<f64> {
    match v {
        ParamValue::Int(i) => Some(*i as f64),
        ParamValue::List(xs) if xs.len() == 1 => n_value(&xs[0]),
        _ => None,
    }
}

fn grid_fits(cfg: &SweepConfig, cells: &[Cell], results: &[Result<RunOutput>]) -> Vec<FitRecord> {
    let Some(n_axis) = cfg.axes.iter().position(|(k, _)| k == "N") else {
        return Vec::new();
    };
    // Groups keyed by the other axis values, in order of first appearance.
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let label = cfg
            .axes
            .iter()
            .zip(&cell.values)
            .enumerate()
            .filter(|(k, _)| *k != n_axis)
            .map(|(_, ((name, _), v))| format!("{name}={}", axis_text(v)))
            .collect::<Vec<_>>()
            .join(",");
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, idx)) => idx.push(i),
            None => groups.push((label, vec![i])),
        }
    }
    let mut fits = Vec::new();
    for target in n_fit_targets(cfg.base.experiment) {
        for (label, idx) in &groups {
            let (mut x, mut y) = (Vec::new(), Vec::new());
            for &i in idx {
                if let (Ok(out), Some(n)) = (&results[i], n_value(&cells[i].values[n_axis])) {
                    if let Some(v) = out.summary_value(target) {
                        x.push(n);
                        y.push(v);
                    }
                }
            }
            let name = if label.is_empty() {
                format!("{target}_vs_N")
            } else {
                format!("{target}_vs_N[{label}]")
            };
            fits.extend(FitRecord::fit(&name, "N", target, &x, &y));
        }
    }
    fits
}

/// Executes every cell on `jobs` threads (`0` = all cores) and writes
/// per-cell artifacts, `aggregate.csv` and `sweep.json`.
///
/// A failing cell is recorded and the sweep carries on; output bytes do not
/// depend on `jobs`.
pub fn sweep(cfg: &SweepConfig, jobs: usize) -> Result<SweepRecord> {
    let start = Instant::now();
    let cells = cfg.cells();
    let configs: Vec<ExperimentConfig> = cells
        .iter()
        .map(|c| cfg.cell_config(c))
        .collect::<Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let results: Vec<Result<RunOutput>> =
        pool.install(|| configs.par_iter().map(execute).collect());

    std::fs::create_dir_all(&cfg.base.output_dir)?;
    let mut artifacts = Vec::new();
    let mut failures = Vec::new();
    let keys = summary_keys(cfg.base.experiment);
    let mut header: Vec<String> = vec!["cell".into(), "seed".into(), "replicate".into()];
    header.extend(cfg.axes.iter().map(|(k, _)| k.clone()));
    header.push("status".into());
    header.extend(keys.iter().map(|k| k.to_string()));
    header.push("message".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = CsvTable::new(&header_refs);
    for ((cell, conf), res) in cells.iter().zip(&configs).zip(&results) {
        let mut row = vec![
            cell.index.to_string(),
            cell.seed.to_string(),
            cell.replicate.to_string(),
        ];
        row.extend(cell.values.iter().map(axis_text));
        match res {
            Ok(out) => {
                let rec = write_run(conf, out, 0.0)?;
                let dir = cell_dir_name(cell.index);
                artifacts.extend(
                    rec.artifacts
                        .iter()
                        .chain(std::iter::once(&super::RUN_RECORD.to_string()))
                        .map(|a| dir.join(a).to_string_lossy().into_owned()),
                );
                row.push("ok".into());
                row.extend(keys.iter().map(|k| fmt_f64(out.summary_value(k).unwrap_or(f64::NAN))));
                row.push(String::new());
            }
            Err(e) => {
                failures.push(CellFailure {
                    cell: cell.index,
                    kind: e.kind().into(),
                    message: e.to_string(),
                    exit_code: e.exit_code(),
                });
                row.push(e.kind().into());
                row.extend(keys.iter().map(|_| String::new()));
                row.push(sanitize(&e.to_string()));
            }
        }
        table.push_row(row);
    }
    write_atomic(&cfg.base.output_dir.join(AGGREGATE_CSV), &table.to_bytes())?;
    artifacts.push(AGGREGATE_CSV.into());
    let record = SweepRecord {
        config: cfg.to_raw(),
        n_cells: cells.len(),
        failures,
        artifacts,
        fits: grid_fits(cfg, &cells, &results),
        wall_time_s: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_json(&cfg.base.output_dir.join(SWEEP_RECORD), &record)?;
    Ok(record)
}

/// Per-cell summaries keyed by cell index, read back from a finished sweep.
pub fn read_aggregate(dir: &Path) -> Result<BTreeMap<usize, BTreeMap<String, String>>> {
    let text = std::fs::read_to_string(dir.join(AGGREGATE_CSV))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::invalid("empty aggregate table"))?
        .split(',')
        .collect();
    let mut out = BTreeMap::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let row: BTreeMap<String, String> = header
            .iter()
            .zip(&fields)
            .map(|(h, f)| (h.to_string(), f.to_string()))
            .collect();
        let idx = row
            .get("cell")
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| Error::invalid("aggregate row without cell index"))?;
        out.insert(idx, row);
    }
    Ok(out)
}
