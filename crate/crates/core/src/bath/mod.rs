//! Internal environments of the body and the decoherence factor they produce.

pub mod gue;
pub mod linking;
pub mod recurrence;
pub mod spin;

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::fmt_f64;

pub use gue::{gue_bath_trace, sample_gue, RandomMatrixBathSpec};
pub use linking::{sector_linking_amplitude, SectorLinking, MAX_LINKING_SPINS};
pub use recurrence::{find_recurrences, recurrence_scaling, RecurrenceReport, ScalingRow};
pub use spin::{spin_bath_trace, CouplingPattern, SpinBathSpec};

/// Which bath produced a trace.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceSource {
    Spin(SpinBathSpec),
    RandomMatrix(RandomMatrixBathSpec),
}

/// Time series of `r(t) = ⟨χ_A(t)|χ_B(t)⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceTrace {
    pub times: Vec<f64>,
    pub r_values: Vec<Complex64>,
    pub source: TraceSource,
}

impl DecoherenceTrace {
    pub fn abs_values(&self) -> Vec<f64> {
        self.r_values.iter().map(|r| r.norm()).collect()
    }

    /// Writes `t,re_r,im_r,abs_r` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,re_r,im_r,abs_r")?;
        for (t, r) in self.times.iter().zip(&self.r_values) {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(*t),
                fmt_f64(r.re),
                fmt_f64(r.im),
                fmt_f64(r.norm())
            )?;
        }
        Ok(())
    }
}

/// `n` equally spaced times from `0` to `t_max` inclusive.
pub fn uniform_times(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::invalid("time grid needs n >= 2 and t_max > 0"));
    }
    let last = (n - 1) as f64;
    Ok((0..n).map(|k| t_max * k as f64 / last).collect())
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("times must be finite"));
    }
    Ok(())
}

/// Unitarity guard: every sample must be finite with `|r| ≤ 1 + 1e−10`.
pub(crate) fn check_unitary(r_values: &[Complex64]) -> Result<()> {
    match r_values
        .iter()
        .position(|r| !(r.re.is_finite() && r.im.is_finite()) || r.norm() > 1.0 + 1e-10)
    {
        None => Ok(()),
        Some(k) => Err(Error::NumericalFailure {
            message: format!("decoherence factor left the unit disk at sample {k}"),
            residual: Some(r_values[k].norm()),
            step: Some(k),
        }),
    }
}
