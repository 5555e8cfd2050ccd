use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use crate::bath::recurrence::{find_recurrences, recurrence_scaling, write_scaling_csv, ScalingOptions};
use crate::bath::{gue_bath_trace, spin_bath_trace, uniform_times, CouplingPattern, RandomMatrixBathSpec, SpinBathSpec};
use crate::double_slit::{
    compare_with_classical_on, default_screen_bins, make_branches, write_pattern_csv, write_scan_csv,
    SlitGeometry, SlitScanRow,
};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, CsvTable};
use crate::measurement::{
    ensemble_distinctness, pointer_scan, tunneling_doublet, write_scan_csv as write_rho_csv, MicroState,
};
use crate::states::{
    effective_epsilon, perturb_cluster, product_overlap, sector_log_overlap, ClusterState, GaussianPacket,
    PerturbationSpec, ProductState,
};
use crate::stats::linear_fit;

/// Product states larger than this are refused.
pub const MAX_SCAN_CLUSTERS: usize = 10_000_000;

/// One output file held in memory until the whole run has succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Straight-line fit reported in run and sweep records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub name: String,
    pub x: String,
    pub y: String,
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub n_points: usize,
}

impl FitRecord {
    pub fn fit(name: &str, x_name: &str, y_name: &str, x: &[f64], y: &[f64]) -> Option<Self> {
        let n_points = x
            .iter()
            .zip(y)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .count();
        linear_fit(x, y).map(|f| FitRecord {
            name: name.to_string(),
            x: x_name.to_string(),
            y: y_name.to_string(),
            slope: f.slope,
            intercept: f.intercept,
            rms_residual: f.rms_residual,
            n_points,
        })
    }
}

/// Everything a run produces before anything touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub fits: Vec<FitRecord>,
    /// Scalar results, in a fixed order per experiment; sweeps aggregate these.
    pub summary: Vec<(String, f64)>,
}

impl RunOutput {
    fn new() -> Self {
        RunOutput {
            artifacts: Vec::new(),
            fits: Vec::new(),
            summary: Vec::new(),
        }
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
        let mut bytes = Vec::new();
        write(&mut bytes)?;
        self.artifacts.push(Artifact {
            name: name.to_string(),
            bytes,
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| Error::invalid(format!("serializing {name}: {e}")))?;
        bytes.push(b'\n');
        self.artifacts.push(Artifact {
            name: name.to_string(),
            bytes,
        });
        Ok(())
    }

    fn put(&mut self, key: &str, v: f64) {
        self.summary.push((key.to_string(), v));
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// Summary keys each experiment reports, in output order.
pub fn summary_keys(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::OverlapScan => &["log_abs_r", "abs_r", "decay_constant"],
        ExperimentKind::DoubleSlit => &["abs_r", "log_abs_r", "visibility", "log_visibility", "tv_distance"],
        ExperimentKind::BathSpin | ExperimentKind::BathGue => {
            &["plateau_level", "first_recurrence_time", "final_abs_r"]
        }
        ExperimentKind::RecurrenceScan => &["max_median_recurrence", "max_censored_fraction"],
        ExperimentKind::Measure => &["abs_r_pointer", "abs_rho_ud", "log_abs_rho_ud", "mean_sq_overlap"],
        ExperimentKind::Doublet => &["lower_level", "upper_level", "splitting"],
    }
}

/// Computes every artifact of `config` in memory.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput> {
    let out = match config.experiment {
        ExperimentKind::OverlapScan => overlap_scan(config),
        ExperimentKind::DoubleSlit => double_slit(config),
        ExperimentKind::BathSpin => bath_spin(config),
        ExperimentKind::BathGue => bath_gue(config),
        ExperimentKind::RecurrenceScan => recurrence_scan(config),
        ExperimentKind::Measure => measure(config),
        ExperimentKind::Doublet => doublet(config),
    }?;
    debug_assert_eq!(
        out.summary.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>(),
        summary_keys(config.experiment)
    );
    Ok(out)
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid(format!("epsilon must lie in [0, 1), got {eps}")));
    }
    Ok(())
}

/// A cluster of width `sigma` and the same cluster pushed by a linear
/// potential hard enough that their overlap magnitude is `1 − ε`.
pub fn pushed_cluster_pair(sigma: f64, epsilon: f64) -> Result<(ClusterState, PerturbationSpec)> {
    check_epsilon(epsilon)?;
    let packet = GaussianPacket::new(0.0, sigma, 0.0)?;
    // Implied oscillator: ω = 1/(2σ²), stiffness k = ω²; shift d gives overlap exp(−d²/8σ²).
    let omega = 1.0 / (2.0 * sigma * sigma);
    let shift = (-8.0 * sigma * sigma * (-epsilon).ln_1p()).sqrt();
    Ok((ClusterState::gaussian(0, packet), PerturbationSpec::linear(omega * omega * shift)))
}

fn overlap_scan(c: &ExperimentConfig) -> Result<RunOutput> {
    let p = c.view();
    let ns = p.counts("N");
    let (eps, sigma) = (p.float("epsilon"), p.float("sigma"));
    if let Some(&n) = ns.iter().find(|&&n| n == 0 || n > MAX_SCAN_CLUSTERS) {
        return Err(if n == 0 {
            Error::invalid("N must be >= 1")
        } else {
            Error::Capacity(format!("N = {n} exceeds {MAX_SCAN_CLUSTERS} clusters"))
        });
    }
    let (reference, push) = pushed_cluster_pair(sigma, eps)?;
    let pushed = perturb_cluster(&reference, &push)?;
    let eps_eff = effective_epsilon(&reference, &push)?;
    let mut table = CsvTable::new(&["N", "epsilon", "log_abs_r", "abs_r", "sector_log_overlap"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &n in &ns {
        let a = ProductState::uniform(&reference, n)?;
        let b = ProductState::uniform(&pushed, n)?;
        let ov = product_overlap(&a, &b)?;
        let predicted = sector_log_overlap(n as f64, eps_eff)?;
        table.push_row(vec![
            n.to_string(),
            fmt_f64(eps),
            fmt_f64(ov.log_magnitude),
            fmt_f64(ov.magnitude()),
            fmt_f64(predicted),
        ]);
        xs.push(n as f64);
        ys.push(ov.log_magnitude);
    }
    let mut out = RunOutput::new();
    out.artifacts.push(Artifact {
        name: "overlap_scan.csv".into(),
        bytes: table.to_bytes(),
    });
    let fit = FitRecord::fit("ln_abs_r_vs_N", "N", "log_abs_r", &xs, &ys);
    let last = *ys.last().expect("N list is non-empty");
    out.put("log_abs_r", last);
    out.put("abs_r", last.exp());
    out.put(
        "decay_constant",
        fit.as_ref().map_or(-last / *xs.last().unwrap(), |f| -f.slope),
    );
    out.fits.extend(fit);
    Ok(out)
}

fn double_slit(c: &ExperimentConfig) -> Result<RunOutput> {
    let p = c.view();
    let ns = p.counts("N");
    let eps = p.float("epsilon");
    check_epsilon(eps)?;
    let mut geom = SlitGeometry::new(p.float("separation"), p.float("width"), p.float("mass"))?;
    let t_param = p.float("t");
    if !(t_param.is_finite() && t_param >= 0.0) {
        return Err(Error::invalid(format!("t must be >= 0 (0 selects the automatic screen time), got {t_param}")));
    }
    if t_param > 0.0 {
        geom.screen_time = Some(t_param);
    }
    let t = geom.resolved_screen_time();
    let points = p.count("screen_points");
    if points < 16 {
        return Err(Error::invalid("screen_points must be >= 16"));
    }
    let mut out = RunOutput::new();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let b = make_branches(&geom, n, eps, crate::rng::derive_seed(c.seed, n as u64))?;
        let bins = default_screen_bins(&b, &geom, t, points)?;
        let cmp = compare_with_classical_on(&b, &geom, t, &bins)?;
        out.csv(&format!("pattern_N{n}.csv"), |w| write_pattern_csv(&cmp, w))?;
        rows.push(SlitScanRow::from_comparison(n, eps, &b, &cmp));
    }
    out.csv("double_slit_scan.csv", |w| write_scan_csv(&rows, w))?;
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let lv: Vec<f64> = rows.iter().map(|r| r.visibility.ln()).collect();
    let lr: Vec<f64> = rows.iter().map(|r| r.log_abs_r).collect();
    out.fits.extend(FitRecord::fit("ln_visibility_vs_N", "N", "ln_visibility", &xs, &lv));
    out.fits.extend(FitRecord::fit("ln_abs_r_vs_N", "N", "log_abs_r", &xs, &lr));
    let last = rows.last().expect("N list is non-empty");
    out.put("abs_r", last.abs_r);
    out.put("log_abs_r", last.log_abs_r);
    out.put("visibility", last.visibility);
    out.put("log_visibility", last.visibility.ln());
    out.put("tv_distance", last.tv_distance);
    Ok(out)
}

fn trace_summary(
    out: &mut RunOutput,
    trace: &crate::bath::DecoherenceTrace,
    threshold: f64,
) -> Result<crate::bath::RecurrenceReport> {
    let report = find_recurrences(trace, threshold)?;
    out.put("plateau_level", report.plateau_level);
    out.put("first_recurrence_time", report.first_recurrence_time.unwrap_or(f64::NAN));
    out.put("final_abs_r", trace.r_values.last().map_or(f64::NAN, |r| r.norm()));
    Ok(report)
}

#[derive(Serialize)]
struct ReportJson {
    threshold: f64,
    first_recurrence_time: Option<f64>,
    scan_horizon: f64,
    plateau_level: f64,
    decay_time: Option<f64>,
}

impl From<&crate::bath::RecurrenceReport> for ReportJson {
    fn from(r: &crate::bath::RecurrenceReport) -> Self {
        ReportJson {
            threshold: r.threshold,
            first_recurrence_time: r.first_recurrence_time,
            scan_horizon: r.scan_horizon,
            plateau_level: r.plateau_level,
            decay_time: r.decay_time,
        }
    }
}

fn bath_spin(c: &ExperimentConfig) -> Result<RunOutput> {
    let p = c.view();
    let pattern = match p.text("pattern") {
        "uniform" => CouplingPattern::Uniform(p.float("delta")),
        "random-uniform" => CouplingPattern::RandomUniform {
            min: p.float("delta_min"),
            max: p.float("delta_max"),
            seed: c.seed,
        },
        other => {
            return Err(Error::invalid(format!(
                "pattern must be `uniform` or `random-uniform`, got `{other}`"
            )))
        }
    };
    let spec = SpinBathSpec::new(p.count("N"), pattern)?;
    let times = uniform_times(p.float("t_max"), p.count("n_times"))?;
    let trace = spin_bath_trace(&spec, &times)?;
    let window = p.float("fit_window");
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::invalid("fit_window must be > 0"));
    }
    let mut out = RunOutput::new();
    out.csv("trace.csv", |w| trace.write_csv(w))?;
    let report = trace_summary(&mut out, &trace, p.float("threshold"))?;
    out.json("recurrence.json", &ReportJson::from(&report))?;
    // −ln|r| against t² over the short-time window.
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (t, r) in times.iter().zip(&trace.r_values) {
        if *t <= window && r.norm() > 0.0 {
            x.push(t * t);
            y.push(-r.norm().ln());
        }
    }
    out.fits.extend(FitRecord::fit("short_time_decay", "t^2", "-ln_abs_r", &x, &y));
    Ok(out)
}

fn bath_gue(c: &ExperimentConfig) -> Result<RunOutput> {
    let p = c.view();
    let spec = RandomMatrixBathSpec::new(p.count("dim"), p.float("perturbation_strength"), c.seed)?;
    let times = uniform_times(p.float("t_max"), p.count("n_times"))?;
    let trace = gue_bath_trace(&spec, &times)?;
    let mut out = RunOutput::new();
    out.csv("trace.csv", |w| trace.write_csv(w))?;
    let report = trace_summary(&mut out, &trace, p.float("threshold"))?;
    out.json("recurrence.json", &ReportJson::from(&report))?;
    Ok(out)
}

fn recurrence_scan(c: &ExperimentConfig) -> Result<RunOutput> {
    let p = c.view();
    let opts = ScalingOptions {
        horizon: p.float("t_max"),
        n_times: p.count("n_times"),
        perturbation_strength: p.float("perturbation_strength"),
        master_seed: c.seed,
    };
    let dims = p.counts("dims");
    let rows = recurrence_scaling(&dims, p.count("seeds"), p.float("threshold"), &opts)?;
    let mut out = RunOutput::new();
    out.csv("recurrence_scaling.csv", |w| write_scaling_csv(&rows, w))?;
    let xs: Vec<f64> = rows.iter().map(|r| (r.dim as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_plateau.ln()).collect();
    out.fits.extend(FitRecord::fit("ln_plateau_vs_ln_dim", "ln_dim_D", "ln_plateau", &xs, &ys));
    out.put(
        "max_median_recurrence",
        rows.iter().map(|r| r.median_recurrence).fold(f64::NEG_INFINITY, f64::max),
    );
    out.put(
        "max_censored_fraction",
        rows.iter().map(|r| r.censored_fraction).fold(0.0, f64::max),
    );
    Ok(out)
}

fn measure(c: &ExperimentConfig) -> Result<RunOutput> {
    let p = c.view();
    let ns = p.counts("N");
    if ns.contains(&0) {
        return Err(Error::invalid("N must be >= 1"));
    }
    let eps = p.float("epsilon");
    check_epsilon(eps)?;
    let micro = MicroState::real(p.float("alpha"), p.float("beta"))?;
    let (sep, sigma) = (p.float("separation"), p.float("sigma"));
    if !sep.is_finite() {
        return Err(Error::invalid("separation must be finite"));
    }
    let plus = GaussianPacket::new(0.5 * sep, sigma, 0.0)?;
    let minus = GaussianPacket::new(-0.5 * sep, sigma, 0.0)?;
    let rows = pointer_scan(micro, &plus, &minus, &ns, eps, c.seed)?;
    let stats = ensemble_distinctness(p.count("n_states"), p.count("dim"), c.seed)?;
    let mut out = RunOutput::new();
    out.csv("reduced_density.csv", |w| write_rho_csv(&rows, w))?;
    out.json("distinctness.json", &stats)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.log_abs_rho_ud).collect();
    out.fits.extend(FitRecord::fit("ln_abs_rho_ud_vs_N", "N", "log_abs_rho_ud", &xs, &ys));
    let last = rows.last().expect("N list is non-empty");
    out.put("abs_r_pointer", last.abs_r_pointer);
    out.put("abs_rho_ud", last.abs_rho_ud);
    out.put("log_abs_rho_ud", last.log_abs_rho_ud);
    out.put("mean_sq_overlap", stats.mean_sq_overlap.unwrap_or(f64::NAN));
    Ok(out)
}

fn doublet(c: &ExperimentConfig) -> Result<RunOutput> {
    let p = c.view();
    let d = tunneling_doublet(p.float("e0"), p.float("delta"))?;
    let mut out = RunOutput::new();
    out.json("doublet.json", &d)?;
    out.put("lower_level", d.levels[0]);
    out.put("upper_level", d.levels[1]);
    out.put("splitting", d.splitting);
    Ok(out)
}
