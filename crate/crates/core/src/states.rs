//! One-body Gaussian states, product states over clusters, and the overlap
//! algebra between them.
//!
//! Overlaps of product states are carried as a sum of per-cluster complex
//! logarithms, so a state with a million clusters reports a finite
//! `log_magnitude` even when `|⟨A|B⟩|` is far below the smallest `f64`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dynamics::grid::GridWavefunction;
use crate::dynamics::potential::PotentialSpec;
use crate::dynamics::propagate::{relax_ground_state, RelaxOptions};
use crate::error::{Error, Result};

/// Mass of a single cluster coordinate.
pub const CLUSTER_MASS: f64 = 1.0;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// A normalized one-dimensional Gaussian,
///
/// `ψ(x) = (2πσ²)^{-1/4} exp(−(x−c)²/(4σ²) + iβ(x−c)² + ip(x−c) + iφ)`,
///
/// with `σ` the standard deviation of `|ψ|²` and `β` a quadratic phase
/// (chirp). Free or harmonic evolution of an unchirped packet develops a
/// chirp, so `β` is needed for evolution to stay closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub center: f64,
    pub sigma: f64,
    pub momentum: f64,
    pub phase: f64,
    pub chirp: f64,
}

impl GaussianPacket {
    pub fn new(center: f64, sigma: f64, momentum: f64) -> Result<Self> {
        let g = GaussianPacket {
            center,
            sigma,
            momentum,
            phase: 0.0,
            chirp: 0.0,
        };
        g.validate()?;
        Ok(g)
    }

    /// Ground state of `½·m·ω²·(x − center)²`.
    pub fn oscillator_ground_state(center: f64, mass: f64, omega: f64) -> Result<Self> {
        if !(mass > 0.0 && omega > 0.0) {
            return Err(Error::invalid("oscillator needs mass > 0 and omega > 0"));
        }
        Self::new(center, (1.0 / (2.0 * mass * omega)).sqrt(), 0.0)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_chirp(mut self, chirp: f64) -> Self {
        self.chirp = chirp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(format!(
                "packet sigma must be finite and > 0, got {}",
                self.sigma
            )));
        }
        if ![self.center, self.momentum, self.phase, self.chirp]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::invalid("packet parameters must be finite"));
        }
        Ok(())
    }

    /// Complex width coefficient `A` in `exp(−A (x−c)²)`.
    pub(crate) fn width_coefficient(&self) -> Complex64 {
        Complex64::new(1.0 / (4.0 * self.sigma * self.sigma), -self.chirp)
    }

    pub(crate) fn from_width_coefficient(
        center: f64,
        momentum: f64,
        phase: f64,
        a: Complex64,
    ) -> Self {
        GaussianPacket {
            center,
            sigma: (1.0 / (4.0 * a.re)).sqrt(),
            momentum,
            phase,
            chirp: -a.im,
        }
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        let d = x - self.center;
        let norm = (2.0 * PI * self.sigma * self.sigma).powf(-0.25);
        let expo = Complex64::new(
            -d * d / (4.0 * self.sigma * self.sigma),
            self.chirp * d * d + self.momentum * d + self.phase,
        );
        norm * expo.exp()
    }

    /// Momentum variance, `1/(4σ²) + 4β²σ²`.
    pub fn momentum_variance(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        0.25 / s2 + 4.0 * self.chirp * self.chirp * s2
    }

    /// Symmetrized position-momentum covariance, `2βσ²`.
    pub fn position_momentum_covariance(&self) -> f64 {
        2.0 * self.chirp * self.sigma * self.sigma
    }

    /// Samples the packet onto a grid (normalized on the grid).
    pub fn to_grid(&self, x_min: f64, dx: f64, n: usize) -> Result<GridWavefunction> {
        self.validate()?;
        GridWavefunction::from_fn(x_min, dx, n, |x| self.amplitude(x))
    }
}

/// Complex logarithm of `⟨a|b⟩`; the real part is `ln|⟨a|b⟩|`.
///
/// Stays finite for packets whose overlap underflows `f64`.
pub fn gaussian_log_overlap(a: &GaussianPacket, b: &GaussianPacket) -> Result<Complex64> {
    a.validate()?;
    b.validate()?;
    // Origin at a's center: ψa* ψb = Na Nb exp(−α x² + β x + γ).
    let aa = a.width_coefficient().conj();
    let ab = b.width_coefficient();
    let i = Complex64::i();
    let d = b.center - a.center;
    let alpha = aa + ab;
    let beta = 2.0 * ab * d - i * a.momentum + i * b.momentum;
    let gamma = -ab * d * d - i * b.momentum * d + i * (b.phase - a.phase);
    let log_norm = -0.25 * (2.0 * PI * a.sigma * a.sigma).ln()
        - 0.25 * (2.0 * PI * b.sigma * b.sigma).ln();
    let log_gauss = 0.5 * (Complex64::new(PI, 0.0) / alpha).ln() + beta * beta / (4.0 * alpha);
    let mut l = log_gauss + gamma + log_norm;
    l.im = wrap_phase(l.im);
    Ok(l)
}

/// `⟨a|b⟩` by the closed-form Gaussian integral.
pub fn gaussian_overlap(a: &GaussianPacket, b: &GaussianPacket) -> Result<Complex64> {
    Ok(gaussian_log_overlap(a, b)?.exp())
}

/// A cluster on a grid together with the confining potential that defines
/// its Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCluster {
    pub wave: GridWavefunction,
    pub confinement: PotentialSpec,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClusterRepr {
    /// Ground state of the oscillator with `ω = 1/(2·m·σ²)` centered on the packet.
    Gaussian(GaussianPacket),
    Grid(GridCluster),
}

/// One localized internal cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub label: usize,
    pub repr: ClusterRepr,
}

impl ClusterState {
    pub fn gaussian(label: usize, packet: GaussianPacket) -> Self {
        ClusterState {
            label,
            repr: ClusterRepr::Gaussian(packet),
        }
    }

    pub fn grid(label: usize, wave: GridWavefunction, confinement: PotentialSpec, mass: f64) -> Self {
        ClusterState {
            label,
            repr: ClusterRepr::Grid(GridCluster {
                wave,
                confinement,
                mass,
            }),
        }
    }

    /// Ground state of a cluster oscillator (`m = 1`) with frequency `omega`.
    pub fn oscillator(label: usize, omega: f64) -> Result<Self> {
        Ok(Self::gaussian(
            label,
            GaussianPacket::oscillator_ground_state(0.0, CLUSTER_MASS, omega)?,
        ))
    }

    pub fn as_gaussian(&self) -> Option<&GaussianPacket> {
        match &self.repr {
            ClusterRepr::Gaussian(g) => Some(g),
            ClusterRepr::Grid(_) => None,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        match &mut self.repr {
            ClusterRepr::Gaussian(g) => g.phase = phase,
            ClusterRepr::Grid(c) => {
                let rot = Complex64::from_polar(1.0, phase);
                for a in c.wave.amplitudes_mut() {
                    *a *= rot;
                }
            }
        }
        self
    }
}

/// Complex log of `⟨a|b⟩` for two cluster states.
pub fn cluster_log_overlap(a: &ClusterState, b: &ClusterState) -> Result<Complex64> {
    let amp = match (&a.repr, &b.repr) {
        (ClusterRepr::Gaussian(ga), ClusterRepr::Gaussian(gb)) => {
            return gaussian_log_overlap(ga, gb)
        }
        (ClusterRepr::Grid(ca), ClusterRepr::Grid(cb)) => ca.wave.inner(&cb.wave)?,
        (ClusterRepr::Gaussian(g), ClusterRepr::Grid(c)) => {
            let w = &c.wave;
            g.to_grid(w.x_min(), w.dx(), w.len())?.inner(w)?
        }
        (ClusterRepr::Grid(c), ClusterRepr::Gaussian(g)) => {
            let w = &c.wave;
            w.inner(&g.to_grid(w.x_min(), w.dx(), w.len())?)?
        }
    };
    if amp == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(f64::NEG_INFINITY, 0.0));
    }
    Ok(amp.ln())
}

/// Ordered product of `N ≥ 1` cluster states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    clusters: Vec<ClusterState>,
}

impl ProductState {
    pub fn new(clusters: Vec<ClusterState>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::invalid("product state needs at least one cluster"));
        }
        Ok(ProductState { clusters })
    }

    /// `n` relabelled copies of one cluster state.
    pub fn uniform(cluster: &ClusterState, n: usize) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|i| ClusterState {
                    label: i,
                    ..cluster.clone()
                })
                .collect(),
        )
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[ClusterState] {
        &self.clusters
    }

    pub fn into_clusters(self) -> Vec<ClusterState> {
        self.clusters
    }

    /// Tensor product `self ⊗ other`.
    pub fn concat(&self, other: &ProductState) -> ProductState {
        let n = self.n_clusters();
        let mut clusters = self.clusters.clone();
        clusters.extend(other.clusters.iter().enumerate().map(|(i, c)| ClusterState {
            label: n + i,
            ..c.clone()
        }));
        ProductState { clusters }
    }
}

/// Overlap of two product states in log form.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapResult {
    /// `ln|⟨A|B⟩|`; may be `−∞`.
    pub log_magnitude: f64,
    /// `arg⟨A|B⟩` in `(−π, π]`.
    pub phase: f64,
    pub per_cluster_log: Vec<f64>,
}

impl OverlapResult {
    /// `|⟨A|B⟩|`; underflows to zero for very negative `log_magnitude`.
    pub fn magnitude(&self) -> f64 {
        self.log_magnitude.exp()
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude(), self.phase)
    }

    /// Per-cluster decay constant `c` in `|⟨A|B⟩| = e^{−cN}`.
    pub fn decay_constant(&self) -> f64 {
        -self.log_magnitude / self.per_cluster_log.len() as f64
    }
}

pub fn product_overlap(a: &ProductState, b: &ProductState) -> Result<OverlapResult> {
    if a.n_clusters() != b.n_clusters() {
        return Err(Error::invalid(format!(
            "cluster counts differ: {} vs {}",
            a.n_clusters(),
            b.n_clusters()
        )));
    }
    let mut per_cluster_log = Vec::with_capacity(a.n_clusters());
    let mut log_magnitude = 0.0;
    let mut phase = 0.0;
    for (ca, cb) in a.clusters.iter().zip(&b.clusters) {
        let l = cluster_log_overlap(ca, cb)?;
        per_cluster_log.push(l.re);
        log_magnitude += l.re;
        phase = wrap_phase(phase + l.im);
    }
    Ok(OverlapResult {
        log_magnitude,
        phase,
        per_cluster_log,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PerturbationShape {
    /// `±strength·(x − x̄)/support`; `reversed` selects the minus sign.
    LinearGradient { reversed: bool },
    /// `½·strength·((x − x̄)/support)²`.
    Quadratic,
    /// `strength·values[i]` on the nodes of the cluster grid.
    Tabulated(Vec<f64>),
}

/// One-body perturbation induced on a cluster by a collective trajectory.
/// `x̄` is the cluster's center (or mean position on a grid).
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub strength: f64,
    pub shape: PerturbationShape,
    pub support: f64,
}

impl PerturbationSpec {
    pub fn linear(strength: f64) -> Self {
        PerturbationSpec {
            strength,
            shape: PerturbationShape::LinearGradient { reversed: false },
            support: 1.0,
        }
    }

    pub fn linear_reversed(strength: f64) -> Self {
        PerturbationSpec {
            strength,
            shape: PerturbationShape::LinearGradient { reversed: true },
            support: 1.0,
        }
    }

    pub fn quadratic(strength: f64) -> Self {
        PerturbationSpec {
            strength,
            shape: PerturbationShape::Quadratic,
            support: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            return Err(Error::invalid(format!(
                "perturbation strength must be >= 0, got {}",
                self.strength
            )));
        }
        if !(self.support.is_finite() && self.support > 0.0) {
            return Err(Error::invalid("perturbation support must be > 0"));
        }
        Ok(())
    }
}

/// Ground state of the cluster Hamiltonian with the perturbation added.
pub fn perturb_cluster(s: &ClusterState, p: &PerturbationSpec) -> Result<ClusterState> {
    perturb_cluster_with(s, p, &RelaxOptions::default())
}

pub fn perturb_cluster_with(
    s: &ClusterState,
    p: &PerturbationSpec,
    opts: &RelaxOptions,
) -> Result<ClusterState> {
    p.validate()?;
    if p.strength == 0.0 {
        return Ok(s.clone());
    }
    match &s.repr {
        ClusterRepr::Gaussian(g) => {
            g.validate()?;
            if g.momentum != 0.0 || g.chirp != 0.0 {
                return Err(Error::invalid(
                    "Gaussian cluster must be an oscillator ground state (no momentum or chirp)",
                ));
            }
            let m = CLUSTER_MASS;
            let omega = 1.0 / (2.0 * m * g.sigma * g.sigma);
            let k = m * omega * omega;
            let out = match &p.shape {
                PerturbationShape::LinearGradient { reversed } => {
                    let slope = p.strength / p.support * if *reversed { -1.0 } else { 1.0 };
                    GaussianPacket {
                        center: g.center - slope / k,
                        ..*g
                    }
                }
                PerturbationShape::Quadratic => {
                    let k_new = k + p.strength / (p.support * p.support);
                    let omega_new = (k_new / m).sqrt();
                    GaussianPacket {
                        sigma: (1.0 / (2.0 * m * omega_new)).sqrt(),
                        ..*g
                    }
                }
                PerturbationShape::Tabulated(_) => {
                    return Err(Error::invalid(
                        "tabulated perturbations need a grid cluster",
                    ))
                }
            };
            Ok(ClusterState::gaussian(s.label, out))
        }
        ClusterRepr::Grid(c) => {
            let w = &c.wave;
            let mut v = c.confinement.sample(w.x_min(), w.dx(), w.len(), c.mass)?;
            let xbar = w.mean_position();
            match &p.shape {
                PerturbationShape::LinearGradient { reversed } => {
                    let sign = if *reversed { -1.0 } else { 1.0 };
                    for (i, vi) in v.iter_mut().enumerate() {
                        *vi += sign * p.strength * (w.x(i) - xbar) / p.support;
                    }
                }
                PerturbationShape::Quadratic => {
                    for (i, vi) in v.iter_mut().enumerate() {
                        let u = (w.x(i) - xbar) / p.support;
                        *vi += 0.5 * p.strength * u * u;
                    }
                }
                PerturbationShape::Tabulated(values) => {
                    if values.len() != w.len() {
                        return Err(Error::invalid(format!(
                            "tabulated perturbation has {} values, grid has {}",
                            values.len(),
                            w.len()
                        )));
                    }
                    for (vi, t) in v.iter_mut().zip(values) {
                        *vi += p.strength * t;
                    }
                }
            }
            let relaxed = relax_ground_state(w, &v, c.mass, opts)?;
            // Ground states are defined up to phase; align with the input.
            let ov = w.inner(&relaxed)?;
            let mut relaxed = relaxed;
            if ov.norm() > 0.0 {
                let rot = (ov / ov.norm()).conj();
                for a in relaxed.amplitudes_mut() {
                    *a *= rot;
                }
            }
            Ok(ClusterState::grid(
                s.label,
                relaxed,
                c.confinement.clone(),
                c.mass,
            ))
        }
    }
}

/// Overlap deficit `ε = 1 − |⟨s|perturb_cluster(s, p)⟩|`.
pub fn effective_epsilon(s: &ClusterState, p: &PerturbationSpec) -> Result<f64> {
    let perturbed = perturb_cluster(s, p)?;
    let l = cluster_log_overlap(s, &perturbed)?;
    Ok((1.0 - l.re.exp()).clamp(0.0, 1.0))
}

/// `N·ln(1 − ε)`; returns `−∞` for `ε = 1`.
///
/// `n` is a float so that counts beyond `u64` (e.g. `10²⁰`) are accepted.
pub fn sector_log_overlap(n: f64, epsilon: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::invalid(format!("cluster count must be >= 1, got {n}")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    if epsilon == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    Ok(n * (-epsilon).ln_1p())
}
