//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use macrodec::bath::linking::sector_linking_amplitude;
use macrodec::bath::recurrence::{recurrence_scaling, ScalingOptions};
use macrodec::double_slit::{compare_with_classical, make_branches, BranchPair, SlitGeometry};
use macrodec::dynamics::{
    analytic_gaussian_evolve, packet_width, split_step_evolve, split_step_evolve_with_diagnostics,
    EvolutionParams, GridWavefunction, PotentialSpec,
};
use macrodec::experiment::{self, ExperimentConfig, ExperimentKind, ParamValue, RawConfig, SweepConfig};
use macrodec::measurement::{
    condition_on_outcome, entangle, prediction_gap, reduce_to_micro, MicroState, Outcome, PointerLabel,
    PointerState,
};
use macrodec::double_slit::branch_internal_states;
use macrodec::rng::rng_from_seed;
use macrodec::states::GaussianPacket;
use macrodec::measurement::tunneling_doublet;
use num_complex::Complex64;
use rand::Rng;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: macrodec::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn fit_slope(out: &experiment::RunRecord, name: &str) -> Result<f64, String> {
    out.fits
        .iter()
        .find(|f| f.name == name)
        .map(|f| f.slope)
        .ok_or_else(|| format!("fit `{name}` missing"))
}

fn config(kind: ExperimentKind, dir: &Path, sets: &[(&str, ParamValue)]) -> Result<ExperimentConfig, String> {
    let mut c = ExperimentConfig::new(kind);
    c.output_dir = dir.to_path_buf();
    for (k, v) in sets {
        lib(c.set(k, v.clone()).map(|_| ()))?;
    }
    Ok(c)
}

fn counts(r: std::ops::RangeInclusive<i64>) -> ParamValue {
    ParamValue::List(r.map(ParamValue::Int).collect())
}

fn overlap_law(tmp: &Path) -> Verdict {
    let c = config(
        ExperimentKind::OverlapScan,
        &tmp.join("c1"),
        &[("N", counts(1..=40)), ("epsilon", ParamValue::Float(0.05))],
    )?;
    let rec = lib(experiment::run(&c))?;
    let slope = fit_slope(&rec, "ln_abs_r_vs_N")?;
    let expected = 0.95f64.ln();
    let err = (slope / expected - 1.0).abs();
    ensure(err < 0.01, || format!("slope {slope} vs {expected}"))?;
    Ok(format!("slope {slope:.6} vs ln 0.95 = {expected:.6} (rel err {err:.1e})"))
}

fn visibility_suppression(tmp: &Path) -> Verdict {
    let mut raw = RawConfig {
        experiment: Some(ExperimentKind::DoubleSlit),
        output_dir: Some(tmp.join("c2")),
        seed: Some(2),
        ..RawConfig::default()
    };
    raw.grid.insert("N".into(), counts(1..=40));
    raw.grid.insert(
        "epsilon".into(),
        ParamValue::List([0.01, 0.05, 0.1, 0.2].map(ParamValue::Float).to_vec()),
    );
    let cfg = lib(SweepConfig::resolve(&raw, tmp))?;
    let rec = lib(experiment::sweep(&cfg, 0))?;
    ensure(rec.failures.is_empty(), || format!("{} failed cells", rec.failures.len()))?;
    let agg = lib(experiment::sweep::read_aggregate(&tmp.join("c2")))?;
    let mut worst = f64::NEG_INFINITY;
    for row in agg.values() {
        let v: f64 = row["visibility"].parse().map_err(|_| "bad visibility")?;
        let r: f64 = row["abs_r"].parse().map_err(|_| "bad abs_r")?;
        worst = worst.max(v - r);
    }
    ensure(worst <= 1e-3, || format!("visibility exceeds |r| by {worst}"))?;
    let fit = rec
        .fits
        .iter()
        .find(|f| f.name.starts_with("log_visibility_vs_N[epsilon=5.0000000000000003e-2"))
        .ok_or("fit for epsilon 0.05 missing")?;
    let expected = 0.95f64.ln();
    let err = (fit.slope / expected - 1.0).abs();
    ensure(err < 0.05, || format!("slope {} vs {expected}", fit.slope))?;
    Ok(format!(
        "{} cells, max(V − |r|) = {worst:.2e}, slope {:.6} (rel err {err:.1e})",
        rec.n_cells, fit.slope
    ))
}

fn quantum_classical(_: &Path) -> Verdict {
    let geom = lib(SlitGeometry::new(4.0, 0.5, 1.0))?;
    let t = geom.resolved_screen_time();
    let decohered = lib(make_branches(&geom, 200, 0.05, 3))?;
    ensure(decohered.log_abs_r <= -10.0, || format!("ln|r| = {}", decohered.log_abs_r))?;
    let d0 = lib(compare_with_classical(&decohered, &geom, t))?.tv_distance;
    let coherent: BranchPair = lib(BranchPair::with_factor(&geom, Complex64::new(1.0, 0.0)))?;
    let d1 = lib(compare_with_classical(&coherent, &geom, t))?.tv_distance;
    ensure(d0 < 2e-3, || format!("TV at |r| = e^{:.1} is {d0}", decohered.log_abs_r))?;
    ensure(d1 > 0.1, || format!("TV at r = 1 is {d1}"))?;
    Ok(format!("TV {d0:.2e} at ln|r| = {:.2}; TV {d1:.3} at r = 1", decohered.log_abs_r))
}

fn max_diff(psi: &GridWavefunction, g: &GaussianPacket) -> f64 {
    psi.amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| (a - g.amplitude(psi.x(i))).norm())
        .fold(0.0, f64::max)
}

fn propagator(_: &Path) -> Verdict {
    // Reference resolution: dx = 0.05, dt = 0.001, 4096 points.
    let g = lib(GaussianPacket::new(-1.0, 1.0, 2.0))?;
    let psi = lib(g.to_grid(-102.4, 0.05, 4096))?;
    let mut worst = 0.0f64;
    for pot in [PotentialSpec::Free, PotentialSpec::linear(0.3), PotentialSpec::harmonic(0.2)] {
        let p = lib(EvolutionParams::new(0.001, 1000, 1.0))?;
        let (out, diag) = lib(split_step_evolve_with_diagnostics(&psi, &p, &pot))?;
        let exact = lib(analytic_gaussian_evolve(&g, &p, &pot))?;
        let e = max_diff(&out, &exact);
        ensure(e < 1e-6, || format!("{pot:?}: max error {e}"))?;
        ensure(diag.norm_drift < 1e-10, || format!("{pot:?}: norm drift {}", diag.norm_drift))?;
        worst = worst.max(e);
    }
    let g = lib(GaussianPacket::new(1.0, 0.6, 0.5))?;
    let psi = lib(g.to_grid(-25.6, 0.0125, 4096))?;
    let pot = PotentialSpec::harmonic(1.0);
    let err = |dt: f64| -> Result<f64, String> {
        let p = lib(EvolutionParams::over(1.0, dt, 1.0))?;
        let out = lib(split_step_evolve(&psi, &p, &pot))?;
        Ok(max_diff(&out, &lib(analytic_gaussian_evolve(&g, &p, &pot))?))
    };
    let ratio = err(0.02)? / err(0.01)?;
    ensure((ratio - 4.0).abs() <= 0.8, || format!("dt-halving ratio {ratio}"))?;
    Ok(format!("max error {worst:.2e}, dt-halving ratio {ratio:.3}"))
}

fn spreading(_: &Path) -> Verdict {
    let t = 10.0f64;
    let mut growth = Vec::new();
    for m in [1.0, 1e2, 1e4] {
        // Minimal-spread preparation for time t: σ₀² = t/(2m).
        let s0 = (t / (2.0 * m)).sqrt();
        let g = lib(GaussianPacket::new(0.0, s0, 0.0))?;
        let dx = s0 / 16.0;
        let psi = lib(g.to_grid(-2048.0 * dx, dx, 4096))?;
        let p = lib(EvolutionParams::new(t / 10.0, 10, m))?;
        let out = lib(split_step_evolve(&psi, &p, &PotentialSpec::Free))?;
        let w = packet_width(&out);
        let closed = s0 * (1.0 + (t / (2.0 * m * s0 * s0)).powi(2)).sqrt();
        ensure((w - closed).abs() < 1e-8, || format!("m = {m}: width {w} vs {closed}"))?;
        ensure(((t / m).sqrt() - closed).abs() < 1e-12, || "√(t/m) law".into())?;
        growth.push(w);
    }
    let r1 = growth[1] / growth[0];
    let r2 = growth[2] / growth[1];
    ensure((r1 / 0.1 - 1.0).abs() < 0.01 && (r2 / 0.1 - 1.0).abs() < 0.01, || {
        format!("growth ratios {r1}, {r2}")
    })?;
    Ok(format!("widths {growth:.6?}; ratios per 100× mass {r1:.6}, {r2:.6}"))
}

fn spin_bath(tmp: &Path) -> Verdict {
    let c = config(
        ExperimentKind::BathSpin,
        &tmp.join("c6"),
        &[
            ("N", ParamValue::Int(100)),
            ("delta", ParamValue::Float(1.0)),
            ("t_max", ParamValue::Float(0.1)),
            ("n_times", ParamValue::Int(101)),
            ("fit_window", ParamValue::Float(0.1)),
        ],
    )?;
    let rec = lib(experiment::run(&c))?;
    let coef = fit_slope(&rec, "short_time_decay")?;
    let expected = 100.0 / 8.0;
    let err = (coef / expected - 1.0).abs();
    ensure(err < 0.05, || format!("coefficient {coef} vs {expected}"))?;
    Ok(format!("coefficient {coef:.5} vs Nδ²/8 = {expected} (rel err {err:.1e})"))
}

fn random_matrix(_: &Path) -> Verdict {
    let dims = [4, 8, 16, 32, 64];
    let rows = lib(recurrence_scaling(&dims, 20, 0.7, &ScalingOptions::default()))?;
    let mut notes = Vec::new();
    for r in &rows {
        let scale = 1.0 / (r.dim as f64).sqrt();
        ensure(r.mean_plateau > scale / 3.0 && r.mean_plateau < 3.0 * scale, || {
            format!("D = {}: plateau {} vs {scale}", r.dim, r.mean_plateau)
        })?;
        notes.push(format!(
            "D{}: plateau {:.3}, t_rec {:.1}, cens {:.2}",
            r.dim, r.mean_plateau, r.median_recurrence, r.censored_fraction
        ));
    }
    for w in rows.windows(2) {
        ensure(w[1].median_recurrence >= w[0].median_recurrence, || {
            format!("median recurrence drops from D={} to D={}", w[0].dim, w[1].dim)
        })?;
        ensure(w[1].censored_fraction >= w[0].censored_fraction, || {
            format!("censored fraction drops from D={} to D={}", w[0].dim, w[1].dim)
        })?;
    }
    Ok(notes.join("; "))
}

fn sector_linking(_: &Path) -> Verdict {
    let mut notes = Vec::new();
    for (g, t) in [(1.0, 0.1), (0.1, 1.0)] {
        let (mut ns, mut ls) = (Vec::new(), Vec::new());
        for n in 2..=8usize {
            ns.push(n as f64);
            ls.push(lib(sector_linking_amplitude(n, g, t))?.log_amplitude);
        }
        let fit = macrodec::stats::linear_fit(&ns, &ls).ok_or("fit failed")?;
        let expected = (g * t).ln();
        let err = (fit.slope / expected - 1.0).abs();
        ensure(err < 0.15, || format!("g={g}, t={t}: slope {} vs {expected}", fit.slope))?;
        notes.push(format!("g={g}, t={t}: slope {:.4} (rel err {err:.3})", fit.slope));
    }
    Ok(notes.join("; "))
}

fn measurement(_: &Path) -> Verdict {
    let mut rng = rng_from_seed(99);
    let mut worst = 0.0f64;
    let mut worst_sum = 0.0f64;
    for _ in 0..200 {
        let th = rng.random::<f64>() * std::f64::consts::FRAC_PI_2;
        let (pa, pb) = (rng.random::<f64>() * 6.0, rng.random::<f64>() * 6.0);
        let micro = lib(MicroState::new(
            Complex64::from_polar(th.cos(), pa),
            Complex64::from_polar(th.sin(), pb),
        ))?;
        let n = rng.random_range(1..300usize);
        let eps = rng.random::<f64>() * 0.3;
        let sep = rng.random::<f64>() * 3.0;
        let sigma = 0.5 + rng.random::<f64>();
        let (a, b) = lib(branch_internal_states(n, eps, rng.random()))?;
        let plus = PointerState {
            collective: lib(GaussianPacket::new(0.5 * sep, sigma, 0.0))?,
            internal: a.clone(),
            label: PointerLabel::Plus,
        };
        let minus = PointerState {
            collective: lib(GaussianPacket::new(-0.5 * sep, sigma, 0.0))?,
            internal: b,
            label: PointerLabel::Minus,
        };
        let ready = PointerState { label: PointerLabel::Ready, ..plus.clone() };
        let comp = lib(entangle(micro, &ready, plus, minus))?;
        let rho = reduce_to_micro(&comp);
        // Closed forms: equal-width packets overlap as exp(−d²/8σ²), each cluster as 1 − ε.
        let pointer = (-(sep * sep) / (8.0 * sigma * sigma)).exp() * (1.0 - eps).powi(n as i32);
        let expected = th.cos() * th.sin() * pointer;
        worst = worst.max((rho.rho_ud.norm() - expected).abs());
        let pp = lib(condition_on_outcome(&comp, Outcome::Plus))?.probability;
        let pm = lib(condition_on_outcome(&comp, Outcome::Minus))?.probability;
        worst_sum = worst_sum.max((pp + pm - 1.0).abs());
    }
    ensure(worst < 1e-12, || format!("|ρ_ud| error {worst}"))?;
    ensure(worst_sum < 1e-12, || format!("probability sum error {worst_sum}"))?;

    // Two-branch oracle: explicit state in C² ⊗ C² with ⟨−|+⟩ = r, |r| = 0.1.
    let micro = lib(MicroState::real(0.6, 0.8))?;
    let (a, b) = lib(branch_internal_states(1, 0.9, 5))?;
    let col = lib(GaussianPacket::new(0.0, 1.0, 0.0))?;
    let plus = PointerState { collective: col, internal: a, label: PointerLabel::Plus };
    let minus = PointerState { collective: col, internal: b, label: PointerLabel::Minus };
    let ready = PointerState { label: PointerLabel::Ready, ..plus.clone() };
    let comp = lib(entangle(micro, &ready, plus, minus))?;
    let r = comp.log_pointer_overlap.exp();
    let c = |x: f64| Complex64::new(x, 0.0);
    let pv = [c(1.0), c(0.0)];
    let mv = [r.conj(), c((1.0 - r.norm_sqr()).sqrt())];
    let psi = [[c(0.6) * pv[0], c(0.6) * pv[1]], [c(0.8) * mv[0], c(0.8) * mv[1]]];
    let bound = lib(condition_on_outcome(&comp, Outcome::Plus))?.prediction_bound;
    let mut worst_gap = 0.0f64;
    for k in 0..400 {
        let th = (k / 20) as f64 * std::f64::consts::PI / 38.0;
        let e = Complex64::from_polar(1.0, (k % 20) as f64 * std::f64::consts::PI / 10.0);
        let u = [[c(th.cos()), -e.conj() * th.sin()], [e * th.sin(), c(th.cos())]];
        // Outcome-0 probability from the full state and from the collapsed mixture.
        let full: f64 = psi[0]
            .iter()
            .zip(&psi[1])
            .map(|(up, down)| (u[0][0] * up + u[0][1] * down).norm_sqr())
            .sum();
        let mixed = u[0][0].norm_sqr() * 0.36 + u[0][1].norm_sqr() * 0.64;
        let gap = prediction_gap(&comp, &u);
        ensure((gap - (full - mixed).abs()).abs() < 1e-13, || format!("gap {gap} vs oracle"))?;
        worst_gap = worst_gap.max(gap);
    }
    ensure(worst_gap <= bound + 1e-15, || format!("gap {worst_gap} > bound {bound}"))?;
    Ok(format!(
        "|ρ_ud| err {worst:.1e}, ΣP err {worst_sum:.1e}, max gap {worst_gap:.4} ≤ 2|ρ_ud| = {bound:.4}"
    ))
}

fn doublet(_: &Path) -> Verdict {
    let mut worst = 0.0f64;
    for &delta in &[0.0, 0.5, -0.25, 1e-6, 3.0] {
        let base = lib(tunneling_doublet(0.0, delta))?;
        worst = worst.max((base.splitting - 2.0 * f64::abs(delta)).abs());
        for &e0 in &[-10.0, 0.3, 1e3] {
            let d = lib(tunneling_doublet(e0, delta))?;
            worst = worst.max((d.splitting - base.splitting).abs());
            worst = worst.max((d.levels[1] - d.levels[0] - 2.0 * f64::abs(delta)).abs());
        }
    }
    ensure(worst < 1e-12, || format!("splitting error {worst}"))?;
    Ok(format!("max splitting error {worst:.1e}"))
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if !matches!(
                p.file_name().and_then(|f| f.to_str()),
                Some("run.json" | "sweep.json")
            ) {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism(tmp: &Path) -> Verdict {
    let small: &[(ExperimentKind, &[(&str, ParamValue)])] = &[
        (ExperimentKind::OverlapScan, &[]),
        (ExperimentKind::DoubleSlit, &[]),
        (ExperimentKind::BathSpin, &[("pattern", ParamValue::Text("random-uniform".into()))]),
        (ExperimentKind::BathGue, &[("dim", ParamValue::Int(16))]),
        (
            ExperimentKind::RecurrenceScan,
            &[("dims", ParamValue::List(vec![ParamValue::Int(4), ParamValue::Int(8)])), ("seeds", ParamValue::Int(4))],
        ),
        (ExperimentKind::Measure, &[]),
        (ExperimentKind::Doublet, &[]),
    ];
    let mut files = 0;
    for (kind, sets) in small {
        let mut first = None;
        for rep in 0..2 {
            let dir = tmp.join(format!("c11/{kind}/{rep}"));
            let mut c = config(*kind, &dir, sets)?;
            c.seed = 1234;
            lib(experiment::run(&c))?;
            let bytes = dir_bytes(&dir);
            match &first {
                None => first = Some(bytes),
                Some(f) => ensure(*f == bytes, || format!("{kind}: artifacts differ"))?,
            }
        }
        files += first.map_or(0, |f| f.len());
    }
    // Sweeps: identical bytes regardless of thread count.
    let mut raw = RawConfig {
        experiment: Some(ExperimentKind::Measure),
        seed: Some(7),
        ..RawConfig::default()
    };
    raw.grid.insert("epsilon".into(), ParamValue::List([0.01, 0.1].map(ParamValue::Float).to_vec()));
    raw.replicates = Some(3);
    let mut sweeps = Vec::new();
    for jobs in [1, 4] {
        raw.output_dir = Some(tmp.join(format!("c11/sweep{jobs}")));
        let cfg = lib(SweepConfig::resolve(&raw, tmp))?;
        lib(experiment::sweep(&cfg, jobs))?;
        sweeps.push(dir_bytes(&tmp.join(format!("c11/sweep{jobs}"))));
    }
    ensure(sweeps[0] == sweeps[1], || "sweep artifacts depend on --jobs".into())?;
    Ok(format!("{files} run artifacts and {} sweep artifacts byte-identical", sweeps[0].len()))
}

type Criterion = (&'static str, Duration, fn(&Path) -> Verdict);

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let criteria: [Criterion; 11] = [
        ("exponential overlap law", Duration::from_secs(1), overlap_law),
        ("fringe-visibility suppression", Duration::from_secs(30), visibility_suppression),
        ("quantum-classical indistinguishability", Duration::from_secs(10), quantum_classical),
        ("propagator correctness", Duration::from_secs(10), propagator),
        ("spreading scaling", Duration::from_secs(1), spreading),
        ("spin-bath short-time decay", Duration::from_secs(1), spin_bath),
        ("random-matrix plateau and recurrence trend", Duration::from_secs(120), random_matrix),
        ("sector-linking order-N structure", Duration::from_secs(30), sector_linking),
        ("measurement factorization", Duration::from_secs(1), measurement),
        ("coherent tunneling doublet", Duration::from_secs(1), doublet),
        ("determinism", Duration::from_secs(120), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check(tmp.path());
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= *budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; over time budget {budget:?}"))
            }
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name} [{:.2?}] {detail}", i + 1, elapsed),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{:.2?}] {why}", i + 1, elapsed);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
