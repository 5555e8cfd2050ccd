//! Two-slit experiment for a body with internal structure.
//!
//! The collective coordinate leaves the slits as two Gaussian branches; each
//! branch is entangled with a product state of `N` internal clusters whose
//! overlap `r` multiplies the interference term on the screen.

use std::f64::consts::PI;
use std::io::Write;
use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;

use crate::dynamics::potential::PotentialSpec;
use crate::dynamics::propagate::evolve_gaussian_for;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::liouville::{classical_density, liouville_free_evolve, match_marginals, Bins, ClassicalSource};
use crate::rng::rng_from_seed;
use crate::states::{
    gaussian_overlap, perturb_cluster, product_overlap, ClusterState, GaussianPacket,
    OverlapResult, PerturbationSpec, ProductState,
};

/// Default screen resolution.
pub const DEFAULT_SCREEN_POINTS: usize = 4096;
/// Screen time, in units of the which-slit ambiguity time, used when none is given.
pub const AUTO_SCREEN_FACTOR: f64 = 10.0;
/// Fraction of each branch envelope's peak that bounds the visibility window.
pub const WINDOW_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitGeometry {
    /// Center-to-center slit distance `L`.
    pub separation: f64,
    /// Packet width `w` at each slit.
    pub width: f64,
    /// Mass `M` of the collective coordinate.
    pub mass: f64,
    /// Time of flight to the screen; `None` selects [`AUTO_SCREEN_FACTOR`] ambiguity times.
    pub screen_time: Option<f64>,
}

impl SlitGeometry {
    pub fn new(separation: f64, width: f64, mass: f64) -> Result<Self> {
        let g = SlitGeometry {
            separation,
            width,
            mass,
            screen_time: None,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(Error::invalid("slit separation must be > 0"));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::invalid("slit width must be > 0"));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::invalid("mass must be > 0"));
        }
        if let Some(t) = self.screen_time {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid("screen time must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn resolved_screen_time(&self) -> f64 {
        self.screen_time
            .unwrap_or(AUTO_SCREEN_FACTOR * which_slit_ambiguity_time(self))
    }
}

/// Time after which free spreading blurs which slit a classical trajectory
/// came from: `2·M·L·w` (ħ = 1, momentum spread scale `1/w`).
pub fn which_slit_ambiguity_time(geom: &SlitGeometry) -> f64 {
    2.0 * geom.mass * geom.separation * geom.width
}

/// The two branches of the collective coordinate and their internal states.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPair {
    pub branch_up: GaussianPacket,
    pub branch_down: GaussianPacket,
    /// Relative branch amplitudes (equal by default).
    pub amplitude_up: f64,
    pub amplitude_down: f64,
    /// `None` for a structureless body (`N = 0`).
    pub internal: Option<(ProductState, ProductState)>,
    /// `r = ⟨internal_up|internal_down⟩`.
    pub decoherence_factor: Complex64,
    /// `ln|r|`, exact even when `|r|` underflows.
    pub log_abs_r: f64,
}

impl BranchPair {
    /// Symmetric branches with a prescribed decoherence factor and no
    /// internal states.
    pub fn with_factor(geom: &SlitGeometry, r: Complex64) -> Result<Self> {
        geom.validate()?;
        if r.norm() > 1.0 + 1e-12 {
            return Err(Error::invalid("decoherence factor must satisfy |r| <= 1"));
        }
        let (up, down) = branch_packets(geom)?;
        Ok(BranchPair {
            branch_up: up,
            branch_down: down,
            amplitude_up: 1.0,
            amplitude_down: 1.0,
            internal: None,
            decoherence_factor: r,
            log_abs_r: r.norm().ln(),
        })
    }

    pub fn abs_r(&self) -> f64 {
        self.log_abs_r.exp()
    }
}

fn branch_packets(geom: &SlitGeometry) -> Result<(GaussianPacket, GaussianPacket)> {
    let h = 0.5 * geom.separation;
    Ok((
        GaussianPacket::new(h, geom.width, 0.0)?,
        GaussianPacket::new(-h, geom.width, 0.0)?,
    ))
}

/// Pushes for the two branches that leave each unit-oscillator cluster with
/// overlap magnitude `1 − ε` between branches.
///
/// Displacing by `±f/2` gives `|⟨up|down⟩| = exp(−f²/4)`.
pub fn branch_perturbations(epsilon: f64) -> (PerturbationSpec, PerturbationSpec) {
    let f = 2.0 * (-(-epsilon).ln_1p()).sqrt();
    (
        PerturbationSpec::linear(0.5 * f),
        PerturbationSpec::linear_reversed(0.5 * f),
    )
}

/// Internal states correlated with the two branches: `N` clusters, each pushed
/// in opposite directions by the two trajectories and given an independent
/// seeded phase per branch.
pub fn branch_internal_states(n: usize, epsilon: f64, seed: u64) -> Result<(ProductState, ProductState)> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    if n == 0 {
        return Err(Error::invalid("internal states need at least one cluster"));
    }
    let reference = ClusterState::oscillator(0, 1.0)?;
    let (p_up, p_down) = branch_perturbations(epsilon);
    let up = perturb_cluster(&reference, &p_up)?;
    let down = perturb_cluster(&reference, &p_down)?;
    let mut rng = rng_from_seed(seed);
    let mut ups = Vec::with_capacity(n);
    let mut downs = Vec::with_capacity(n);
    for i in 0..n {
        let a: f64 = rng.random::<f64>() * 2.0 * PI;
        let b: f64 = rng.random::<f64>() * 2.0 * PI;
        ups.push(ClusterState { label: i, ..up.clone() }.with_phase(a));
        downs.push(ClusterState { label: i, ..down.clone() }.with_phase(b));
    }
    Ok((ProductState::new(ups)?, ProductState::new(downs)?))
}

/// Builds the branch pair for a body with `n` internal clusters.
pub fn make_branches(geom: &SlitGeometry, n: usize, epsilon: f64, seed: u64) -> Result<BranchPair> {
    geom.validate()?;
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    let (up, down) = branch_packets(geom)?;
    if n == 0 {
        return Ok(BranchPair {
            branch_up: up,
            branch_down: down,
            amplitude_up: 1.0,
            amplitude_down: 1.0,
            internal: None,
            decoherence_factor: Complex64::new(1.0, 0.0),
            log_abs_r: 0.0,
        });
    }
    let (a, b) = branch_internal_states(n, epsilon, seed)?;
    let ov: OverlapResult = product_overlap(&a, &b)?;
    Ok(BranchPair {
        branch_up: up,
        branch_down: down,
        amplitude_up: 1.0,
        amplitude_down: 1.0,
        decoherence_factor: ov.amplitude(),
        log_abs_r: ov.log_magnitude,
        internal: Some((a, b)),
    })
}

/// Densities on the screen at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenPattern {
    pub bins: Bins,
    pub total: Vec<f64>,
    /// Pattern with the interference term removed.
    pub envelope: Vec<f64>,
    pub visibility: f64,
    /// Index range where both branch envelopes exceed [`WINDOW_FRACTION`] of their peak.
    pub window: Option<Range<usize>>,
}

impl ScreenPattern {
    pub fn positions(&self) -> Vec<f64> {
        self.bins.centers().collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.total.iter().sum::<f64>() * self.bins.dx
    }
}

/// Screen bins centered on the origin covering both branches with ten
/// widths of margin.
pub fn default_screen_bins(b: &BranchPair, geom: &SlitGeometry, t: f64, n: usize) -> Result<Bins> {
    let s = evolve_gaussian_for(&b.branch_up, t, geom.mass, &PotentialSpec::Free)?.sigma;
    let half = 0.5 * geom.separation + 10.0 * s;
    let dy = 2.0 * half / n as f64;
    Bins::new(-half + 0.5 * dy, dy, n)
}

/// Michelson contrast `(max − min)/(max + min)` over `window`.
pub fn fringe_visibility(density: &[f64], window: Range<usize>) -> Result<f64> {
    if window.end > density.len() || window.len() < 3 {
        return Err(Error::invalid("visibility window must hold at least three samples"));
    }
    let w = &density[window];
    let max = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max + min > 0.0) || min < 0.0 {
        return Err(Error::invalid("visibility needs a positive density in the window"));
    }
    Ok(((max - min) / (max + min)).clamp(0.0, 1.0))
}

/// Screen pattern at time `t` on the default screen.
pub fn screen_pattern(b: &BranchPair, geom: &SlitGeometry, t: f64) -> Result<ScreenPattern> {
    let bins = default_screen_bins(b, geom, t, DEFAULT_SCREEN_POINTS)?;
    screen_pattern_on(b, geom, t, &bins)
}

/// Screen pattern at time `t` on the given bins.
///
/// `total ∝ a²|ψ↑|² + b²|ψ↓|² + 2ab·Re(r·ψ↑*·ψ↓)`, normalized by the exact
/// `a² + b² + 2ab·Re(r⟨ψ↑|ψ↓⟩)`. The visibility is the Michelson contrast of
/// `total/envelope` inside the window, which isolates the fringes from the
/// slowly varying envelope.
pub fn screen_pattern_on(b: &BranchPair, geom: &SlitGeometry, t: f64, bins: &Bins) -> Result<ScreenPattern> {
    geom.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("screen time must be >= 0"));
    }
    let up = evolve_gaussian_for(&b.branch_up, t, geom.mass, &PotentialSpec::Free)?;
    let down = evolve_gaussian_for(&b.branch_down, t, geom.mass, &PotentialSpec::Free)?;
    let (ca, cb) = (b.amplitude_up, b.amplitude_down);
    let r = b.decoherence_factor;
    let cross_norm = (r * gaussian_overlap(&up, &down)?).re;
    let norm = ca * ca + cb * cb + 2.0 * ca * cb * cross_norm;
    let env_norm = ca * ca + cb * cb;
    let n = bins.n;
    let mut total = Vec::with_capacity(n);
    let mut envelope = Vec::with_capacity(n);
    let mut ratio = Vec::with_capacity(n);
    let mut d_up = Vec::with_capacity(n);
    let mut d_down = Vec::with_capacity(n);
    for y in bins.centers() {
        let (pu, pd) = (up.amplitude(y), down.amplitude(y));
        let env = ca * ca * pu.norm_sqr() + cb * cb * pd.norm_sqr();
        let raw = env + 2.0 * ca * cb * (r * pu.conj() * pd).re;
        total.push(raw.max(0.0) / norm);
        envelope.push(env / env_norm);
        ratio.push(if env > 0.0 { raw.max(0.0) / env } else { 0.0 });
        d_up.push(pu.norm_sqr());
        d_down.push(pd.norm_sqr());
    }
    let window = overlap_window(&d_up, &d_down);
    let visibility = match &window {
        Some(w) => fringe_visibility(&ratio, w.clone())?,
        None => 0.0,
    };
    Ok(ScreenPattern {
        bins: *bins,
        total,
        envelope,
        visibility,
        window,
    })
}

fn overlap_window(a: &[f64], b: &[f64]) -> Option<Range<usize>> {
    let pa = a.iter().cloned().fold(0.0, f64::max);
    let pb = b.iter().cloned().fold(0.0, f64::max);
    let inside = |i: usize| a[i] >= WINDOW_FRACTION * pa && b[i] >= WINDOW_FRACTION * pb;
    let start = (0..a.len()).find(|&i| inside(i))?;
    let end = (start..a.len()).find(|&i| !inside(i)).unwrap_or(a.len());
    (end - start >= 3).then_some(start..end)
}

/// Total-variation distance `½ Σ|p − q|·dx` between two densities on the same bins.
pub fn total_variation(p: &[f64], q: &[f64], dx: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "density grids differ: {} vs {} bins",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx)
}

/// Screen pattern together with the Liouville density of the matched
/// two-Gaussian phase-space mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenComparison {
    pub pattern: ScreenPattern,
    pub classical: Vec<f64>,
    pub tv_distance: f64,
}

pub fn compare_with_classical(b: &BranchPair, geom: &SlitGeometry, t: f64) -> Result<ScreenComparison> {
    let bins = default_screen_bins(b, geom, t, DEFAULT_SCREEN_POINTS)?;
    compare_with_classical_on(b, geom, t, &bins)
}

pub fn compare_with_classical_on(
    b: &BranchPair,
    geom: &SlitGeometry,
    t: f64,
    bins: &Bins,
) -> Result<ScreenComparison> {
    let pattern = screen_pattern_on(b, geom, t, bins)?;
    let mix = [
        (
            b.amplitude_up * b.amplitude_up,
            liouville_free_evolve(&match_marginals(&b.branch_up), t, geom.mass),
        ),
        (
            b.amplitude_down * b.amplitude_down,
            liouville_free_evolve(&match_marginals(&b.branch_down), t, geom.mass),
        ),
    ];
    let classical = classical_density(ClassicalSource::Mixture(&mix), bins)?;
    let tv_distance = total_variation(&pattern.total, &classical, bins.dx)?;
    Ok(ScreenComparison {
        pattern,
        classical,
        tv_distance,
    })
}

/// Total-variation distance between the quantum screen density and the
/// matched classical density at time `t`.
pub fn quantum_classical_distance(b: &BranchPair, geom: &SlitGeometry, t: f64) -> Result<f64> {
    Ok(compare_with_classical(b, geom, t)?.tv_distance)
}

/// Writes `y,quantum_density,envelope_density,classical_density` rows.
pub fn write_pattern_csv<W: Write>(c: &ScreenComparison, mut w: W) -> std::io::Result<()> {
    writeln!(w, "y,quantum_density,envelope_density,classical_density")?;
    let p = &c.pattern;
    for i in 0..p.bins.n {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(p.bins.center(i)),
            fmt_f64(p.total[i]),
            fmt_f64(p.envelope[i]),
            fmt_f64(c.classical[i])
        )?;
    }
    Ok(())
}

/// Scalar summary of one double-slit run.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitScanRow {
    pub n: usize,
    pub epsilon: f64,
    pub abs_r: f64,
    pub log_abs_r: f64,
    pub visibility: f64,
    pub tv_distance: f64,
}

impl SlitScanRow {
    pub fn from_comparison(n: usize, epsilon: f64, b: &BranchPair, c: &ScreenComparison) -> Self {
        SlitScanRow {
            n,
            epsilon,
            abs_r: b.abs_r(),
            log_abs_r: b.log_abs_r,
            visibility: c.pattern.visibility,
            tv_distance: c.tv_distance,
        }
    }
}

/// Writes `N,epsilon,abs_r,visibility,tv_distance` rows.
pub fn write_scan_csv<W: Write>(rows: &[SlitScanRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "N,epsilon,abs_r,visibility,tv_distance")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.n,
            fmt_f64(r.epsilon),
            fmt_f64(r.abs_r),
            fmt_f64(r.visibility),
            fmt_f64(r.tv_distance)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::grid::GridWavefunction;
    use crate::dynamics::potential::EvolutionParams;
    use crate::dynamics::propagate::split_step_evolve;

    fn geom() -> SlitGeometry {
        SlitGeometry::new(10.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn structureless_body_is_fully_coherent() {
        let b = make_branches(&geom(), 0, 0.05, 1).unwrap();
        assert_eq!(b.decoherence_factor, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn hundred_clusters_at_five_percent() {
        let b = make_branches(&geom(), 100, 0.05, 1).unwrap();
        let expected = 0.95f64.powi(100);
        assert!((b.abs_r() - expected).abs() < 1e-15);
        assert!((b.abs_r() - 5.92e-3).abs() < 1e-5);
    }

    #[test]
    fn branches_are_deterministic() {
        let a = make_branches(&geom(), 30, 0.1, 42).unwrap();
        let b = make_branches(&geom(), 30, 0.1, 42).unwrap();
        assert_eq!(a.decoherence_factor, b.decoherence_factor);
        let c = make_branches(&geom(), 30, 0.1, 43).unwrap();
        assert_ne!(a.decoherence_factor.arg(), c.decoherence_factor.arg());
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(SlitGeometry::new(0.0, 1.0, 1.0).is_err());
        let mut g = geom();
        g.width = -1.0;
        assert!(make_branches(&g, 3, 0.1, 0).is_err());
        assert!(make_branches(&geom(), 3, 1.0, 0).is_err());
    }

    #[test]
    fn michelson_visibility_values() {
        let n = 1000;
        let k = 2.0 * PI / 100.0;
        let cos2: Vec<f64> = (0..n).map(|i| (k * i as f64 / 2.0).cos().powi(2)).collect();
        assert!((fringe_visibility(&cos2, 0..n).unwrap() - 1.0).abs() < 1e-12);
        let flat = vec![0.3; n];
        assert_eq!(fringe_visibility(&flat, 0..n).unwrap(), 0.0);
        let half: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (k * i as f64).cos()).collect();
        assert!((fringe_visibility(&half, 0..n).unwrap() - 0.5).abs() < 1e-12);
        assert!(fringe_visibility(&half, 0..2).is_err());
        assert!(fringe_visibility(&[0.0; 10], 0..10).is_err());
    }

    #[test]
    fn ambiguity_time_formula() {
        let g = SlitGeometry::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(which_slit_ambiguity_time(&g), 2.0);
        let g2 = SlitGeometry { mass: 2.0, ..g };
        assert_eq!(which_slit_ambiguity_time(&g2), 4.0);
    }

    #[test]
    fn liouville_spread_reaches_half_separation_at_ambiguity_time() {
        for (l, w, m) in [(1.0, 1.0, 1.0), (10.0, 1.0, 1.0), (4.0, 0.5, 3.0)] {
            let g = SlitGeometry::new(l, w, m).unwrap();
            let t = which_slit_ambiguity_time(&g);
            let d = match_marginals(&GaussianPacket::new(0.5 * l, w, 0.0).unwrap());
            let e = liouville_free_evolve(&d, t, m);
            assert!(e.xx >= (0.5 * l) * (0.5 * l));
        }
    }

    #[test]
    fn coherent_pattern_has_fringes() {
        let b = BranchPair::with_factor(&geom(), Complex64::new(1.0, 0.0)).unwrap();
        let p = screen_pattern(&b, &geom(), geom().resolved_screen_time()).unwrap();
        assert!(p.visibility > 0.9, "{}", p.visibility);
        assert!((p.total_probability() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn incoherent_pattern_equals_envelope() {
        let b = BranchPair::with_factor(&geom(), Complex64::new(0.0, 0.0)).unwrap();
        let p = screen_pattern(&b, &geom(), geom().resolved_screen_time()).unwrap();
        for (a, e) in p.total.iter().zip(&p.envelope) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!(p.visibility < 0.01);
    }

    #[test]
    fn weak_coherence_bounds_visibility() {
        // Closed form: local contrast is |r|·2|ψ↑||ψ↓|/(|ψ↑|²+|ψ↓|²) ≤ |r|.
        let r = (-5.0f64).exp();
        let b = BranchPair::with_factor(&geom(), Complex64::from_polar(r, 0.7)).unwrap();
        let p = screen_pattern(&b, &geom(), geom().resolved_screen_time()).unwrap();
        assert!(p.visibility <= 2e-2);
        assert!(p.visibility <= r + 1e-3);
        assert!(p.visibility > 0.9 * r);
    }

    #[test]
    fn analytic_pattern_matches_grid_evolution() {
        let g = SlitGeometry::new(4.0, 0.5, 1.0).unwrap();
        let t = which_slit_ambiguity_time(&g);
        let b = BranchPair::with_factor(&g, Complex64::new(1.0, 0.0)).unwrap();
        let (n, dx) = (4096, 0.025);
        let psi = GridWavefunction::centered(dx, n, |x| b.branch_up.amplitude(x) + b.branch_down.amplitude(x)).unwrap();
        let params = EvolutionParams::over(t, 0.01, g.mass).unwrap();
        let out = split_step_evolve(&psi, &params, &PotentialSpec::Free).unwrap();
        let bins = Bins::new(psi.x(0), dx, n).unwrap();
        let p = screen_pattern_on(&b, &g, t, &bins).unwrap();
        let worst = out
            .density()
            .iter()
            .zip(&p.total)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        assert!(p.visibility > 0.9);
    }

    #[test]
    fn distance_tracks_coherence() {
        let g = geom();
        let t = g.resolved_screen_time();
        let d = |r: f64| {
            let b = BranchPair::with_factor(&g, Complex64::new(r, 0.0)).unwrap();
            quantum_classical_distance(&b, &g, t).unwrap()
        };
        let ds: Vec<f64> = [0.0, (-5.0f64).exp(), (-2.0f64).exp(), 1.0].iter().map(|&r| d(r)).collect();
        assert!(ds[0] < 1e-3, "{ds:?}");
        assert!(ds[3] > 0.1, "{ds:?}");
        assert!(ds.windows(2).all(|w| w[1] >= w[0]), "{ds:?}");
    }

    #[test]
    fn grid_mismatch_rejected() {
        assert!(matches!(total_variation(&[1.0, 2.0], &[1.0], 0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn pattern_csv_header() {
        let b = BranchPair::with_factor(&geom(), Complex64::new(0.5, 0.0)).unwrap();
        let c = compare_with_classical(&b, &geom(), 50.0).unwrap();
        let mut buf = Vec::new();
        write_pattern_csv(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("y,quantum_density,envelope_density,classical_density\n"));
        assert_eq!(text.lines().count(), DEFAULT_SCREEN_POINTS + 1);
    }
}
