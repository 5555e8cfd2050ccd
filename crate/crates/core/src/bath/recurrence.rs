use std::io::Write;

use rayon::prelude::*;

use super::gue::{gue_bath_trace, RandomMatrixBathSpec};
use super::{uniform_times, DecoherenceTrace};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::rng::derive_seed;
use crate::stats::median;

pub const DEFAULT_THRESHOLD: f64 = 0.7;
/// Margin above the plateau that marks the end of the initial decay.
pub const DECAY_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport {
    pub threshold: f64,
    pub first_recurrence_time: Option<f64>,
    pub scan_horizon: f64,
    pub plateau_level: f64,
    /// First time `|r|` drops below `plateau_level + DECAY_MARGIN`.
    pub decay_time: Option<f64>,
}

/// Locates the first return of `|r|` to `threshold` after the initial decay.
pub fn find_recurrences(trace: &DecoherenceTrace, threshold: f64) -> Result<RecurrenceReport> {
    let n = trace.times.len();
    if n < 3 || trace.r_values.len() != n {
        return Err(Error::invalid("trace needs at least 3 samples"));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid("threshold must lie in (0, 1]"));
    }
    let abs = trace.abs_values();
    let tail = &abs[n / 2..];
    let plateau_level = tail.iter().sum::<f64>() / tail.len() as f64;
    let decay_idx = abs.iter().position(|&a| a < plateau_level + DECAY_MARGIN);
    let first_recurrence_time = decay_idx.and_then(|d| {
        abs[d + 1..]
            .iter()
            .position(|&a| a >= threshold)
            .map(|k| trace.times[d + 1 + k])
    });
    Ok(RecurrenceReport {
        threshold,
        first_recurrence_time,
        scan_horizon: trace.times[n - 1],
        plateau_level,
        decay_time: decay_idx.map(|d| trace.times[d]),
    })
}

/// Time grid and bath strength shared by every cell of a recurrence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOptions {
    pub horizon: f64,
    pub n_times: usize,
    pub perturbation_strength: f64,
    pub master_seed: u64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            horizon: 200.0,
            n_times: 4001,
            perturbation_strength: 0.5,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub dim: usize,
    /// Median first-recurrence time, censored entries counted at the horizon.
    pub median_recurrence: f64,
    pub censored_fraction: f64,
    /// Mean late-time `|r|` across seeds.
    pub mean_plateau: f64,
}

/// Seed of the `s`-th realization at dimension `dim`.
pub fn scaling_seed(master: u64, dim: usize, s: usize) -> u64 {
    derive_seed(derive_seed(master, dim as u64), s as u64)
}

/// Median recurrence time per dimension over `seeds_per_dim` GUE realizations.
pub fn recurrence_scaling(
    dims: &[usize],
    seeds_per_dim: usize,
    threshold: f64,
    opts: &ScalingOptions,
) -> Result<Vec<ScalingRow>> {
    if dims.is_empty() || seeds_per_dim == 0 {
        return Err(Error::invalid("need at least one dimension and one seed"));
    }
    let times = uniform_times(opts.horizon, opts.n_times)?;
    for &d in dims {
        RandomMatrixBathSpec::new(d, opts.perturbation_strength, 0)?;
    }
    let cells: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&d| (0..seeds_per_dim).map(move |s| (d, s)))
        .collect();
    let reports: Vec<RecurrenceReport> = cells
        .par_iter()
        .map(|&(d, s)| {
            let spec = RandomMatrixBathSpec::new(
                d,
                opts.perturbation_strength,
                scaling_seed(opts.master_seed, d, s),
            )?;
            find_recurrences(&gue_bath_trace(&spec, &times)?, threshold)
        })
        .collect::<Result<_>>()?;
    Ok(dims
        .iter()
        .zip(reports.chunks(seeds_per_dim))
        .map(|(&dim, chunk)| {
            let values: Vec<f64> = chunk
                .iter()
                .map(|r| r.first_recurrence_time.unwrap_or(r.scan_horizon))
                .collect();
            let censored = chunk.iter().filter(|r| r.first_recurrence_time.is_none()).count();
            ScalingRow {
                dim,
                median_recurrence: median(&values),
                censored_fraction: censored as f64 / chunk.len() as f64,
                mean_plateau: chunk.iter().map(|r| r.plateau_level).sum::<f64>()
                    / chunk.len() as f64,
            }
        })
        .collect())
}

/// Writes `dim_D,median_recurrence,censored_fraction` rows.
pub fn write_scaling_csv<W: Write>(rows: &[ScalingRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "dim_D,median_recurrence,censored_fraction")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{}",
            r.dim,
            fmt_f64(r.median_recurrence),
            fmt_f64(r.censored_fraction)
        )?;
    }
    Ok(())
}
