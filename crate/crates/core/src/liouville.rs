//! Classical phase-space evolution matched to quantum Gaussian marginals.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erf;

use crate::dynamics::potential::{EvolutionParams, PotentialSpec};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::rng::{derive_seed, rng_from_seed};
use crate::states::GaussianPacket;

/// Default ensemble size.
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Gaussian density on `(x, p)` with mean and covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPhaseSpace {
    pub mean_x: f64,
    pub mean_p: f64,
    pub xx: f64,
    pub xp: f64,
    pub pp: f64,
}

impl GaussianPhaseSpace {
    pub fn new(mean_x: f64, mean_p: f64, xx: f64, xp: f64, pp: f64) -> Result<Self> {
        let d = GaussianPhaseSpace {
            mean_x,
            mean_p,
            xx,
            xp,
            pp,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xx > 0.0 && self.pp > 0.0) {
            return Err(Error::invalid("phase-space variances must be positive"));
        }
        if self.xx * self.pp - self.xp * self.xp < -1e-12 * self.xx * self.pp {
            return Err(Error::invalid("phase-space covariance is not positive semidefinite"));
        }
        Ok(())
    }

    /// Exact second moments of a Gaussian packet, including the
    /// position–momentum correlation a chirp produces.
    pub fn from_packet_moments(g: &GaussianPacket) -> Self {
        GaussianPhaseSpace {
            mean_x: g.center,
            mean_p: g.momentum,
            xx: g.sigma * g.sigma,
            xp: g.position_momentum_covariance(),
            pp: g.momentum_variance(),
        }
    }

    /// Position marginal density at `x`.
    pub fn position_density(&self, x: f64) -> f64 {
        let d = x - self.mean_x;
        (-(d * d) / (2.0 * self.xx)).exp() / (2.0 * std::f64::consts::PI * self.xx).sqrt()
    }

    /// Applies the affine map `(x, p) ↦ M(x, p) + shift`.
    fn map_linear(&self, m: [[f64; 2]; 2], shift: (f64, f64)) -> Self {
        let mx = m[0][0] * self.mean_x + m[0][1] * self.mean_p + shift.0;
        let mp = m[1][0] * self.mean_x + m[1][1] * self.mean_p + shift.1;
        // M Σ Mᵀ
        let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
        let xx = a * a * self.xx + 2.0 * a * b * self.xp + b * b * self.pp;
        let xp = a * c * self.xx + (a * d + b * c) * self.xp + b * d * self.pp;
        let pp = c * c * self.xx + 2.0 * c * d * self.xp + d * d * self.pp;
        GaussianPhaseSpace {
            mean_x: mx,
            mean_p: mp,
            xx,
            xp,
            pp,
        }
    }
}

/// Zero-correlation Gaussian with the packet's exact position and momentum
/// marginals.
pub fn match_marginals(g: &GaussianPacket) -> GaussianPhaseSpace {
    GaussianPhaseSpace {
        mean_x: g.center,
        mean_p: g.momentum,
        xx: g.sigma * g.sigma,
        xp: 0.0,
        pp: g.momentum_variance(),
    }
}

/// Free Liouville flow: the shear `x → x + p·t/m`.
pub fn liouville_free_evolve(d: &GaussianPhaseSpace, t: f64, mass: f64) -> GaussianPhaseSpace {
    d.map_linear([[1.0, t / mass], [0.0, 1.0]], (0.0, 0.0))
}

/// Exact Liouville flow for the quadratic potential kinds.
pub fn liouville_evolve(
    d: &GaussianPhaseSpace,
    pot: &PotentialSpec,
    t: f64,
    mass: f64,
) -> Result<GaussianPhaseSpace> {
    pot.validate()?;
    match pot {
        PotentialSpec::Free => Ok(liouville_free_evolve(d, t, mass)),
        PotentialSpec::Linear { slope } => Ok(d.map_linear(
            [[1.0, t / mass], [0.0, 1.0]],
            (-slope * t * t / (2.0 * mass), -slope * t),
        )),
        PotentialSpec::Harmonic { omega, center } => {
            let (s, c) = (omega * t).sin_cos();
            let mw = mass * omega;
            let m = [[c, s / mw], [-mw * s, c]];
            // Rotate about (center, 0).
            let shifted = GaussianPhaseSpace {
                mean_x: d.mean_x - center,
                ..*d
            };
            let mut out = shifted.map_linear(m, (0.0, 0.0));
            out.mean_x += center;
            Ok(out)
        }
        _ => Err(Error::invalid(
            "exact Liouville flow needs a free, linear or harmonic potential",
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub x: f64,
    pub p: f64,
    pub weight: f64,
}

/// Weighted classical samples; weights are nonnegative and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceEnsemble {
    samples: Vec<PhaseSample>,
}

/// Standard normal quantiles of one Latin-hypercube column.
fn stratified_normals<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut z: Vec<f64> = (0..n)
        .map(|k| {
            let u: f64 = rng.random();
            let v = ((k as f64 + u) / n as f64).clamp(1e-300, 1.0 - 1e-16);
            normal.inverse_cdf(v)
        })
        .collect();
    z.shuffle(rng);
    z
}

impl PhaseSpaceEnsemble {
    /// Normalizes the weights; rejects empty sets and negative weights.
    pub fn new(mut samples: Vec<PhaseSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("ensemble needs at least one sample"));
        }
        if samples.iter().any(|s| !(s.weight >= 0.0)) {
            return Err(Error::invalid("ensemble weights must be nonnegative"));
        }
        let total: f64 = samples.iter().map(|s| s.weight).sum();
        if !(total > 0.0) {
            return Err(Error::invalid("ensemble weights sum to zero"));
        }
        for s in &mut samples {
            s.weight /= total;
        }
        Ok(PhaseSpaceEnsemble { samples })
    }

    /// Draws `n` equal-weight samples from `d`.
    ///
    /// Each of the two Cholesky coordinates is Latin-hypercube stratified, so
    /// the position marginal has exactly one sample per `1/n` quantile bin.
    pub fn sample(d: &GaussianPhaseSpace, n: usize, seed: u64) -> Result<Self> {
        d.validate()?;
        if n == 0 {
            return Err(Error::invalid("ensemble needs at least one sample"));
        }
        let mut rng = rng_from_seed(seed);
        let z1 = stratified_normals(n, &mut rng);
        let z2 = stratified_normals(n, &mut rng);
        let l11 = d.xx.sqrt();
        let l21 = d.xp / l11;
        let l22 = (d.pp - l21 * l21).max(0.0).sqrt();
        let w = 1.0 / n as f64;
        let samples = z1
            .iter()
            .zip(&z2)
            .map(|(a, b)| PhaseSample {
                x: d.mean_x + l11 * a,
                p: d.mean_p + l21 * a + l22 * b,
                weight: w,
            })
            .collect();
        Ok(PhaseSpaceEnsemble { samples })
    }

    /// Samples a weighted mixture, splitting `n` by weight.
    pub fn sample_mixture(components: &[(f64, GaussianPhaseSpace)], n: usize, seed: u64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        let mut samples = Vec::with_capacity(n);
        for (i, (w, d)) in components.iter().enumerate() {
            let k = ((w / total) * n as f64).round().max(1.0) as usize;
            let part = Self::sample(d, k, derive_seed(seed, i as u64))?;
            samples.extend(part.samples.into_iter().map(|s| PhaseSample {
                weight: w / total / k as f64,
                ..s
            }));
        }
        Self::new(samples)
    }

    pub fn samples(&self) -> &[PhaseSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Weighted mean and covariance.
    pub fn moments(&self) -> GaussianPhaseSpace {
        let mx: f64 = self.samples.iter().map(|s| s.weight * s.x).sum();
        let mp: f64 = self.samples.iter().map(|s| s.weight * s.p).sum();
        let (mut xx, mut xp, mut pp) = (0.0, 0.0, 0.0);
        for s in &self.samples {
            let (dx, dp) = (s.x - mx, s.p - mp);
            xx += s.weight * dx * dx;
            xp += s.weight * dx * dp;
            pp += s.weight * dp * dp;
        }
        GaussianPhaseSpace {
            mean_x: mx,
            mean_p: mp,
            xx,
            xp,
            pp,
        }
    }
}

/// Kick-drift-kick leapfrog step for one trajectory.
pub(crate) fn leapfrog(
    x: f64,
    p: f64,
    pot: &PotentialSpec,
    params: &EvolutionParams,
) -> Option<(f64, f64)> {
    let (dt, m) = (params.dt, params.mass);
    let (mut x, mut p) = (x, p);
    let mut force = -pot.derivative(x, m)?;
    for _ in 0..params.n_steps {
        p += 0.5 * dt * force;
        x += dt * p / m;
        force = -pot.derivative(x, m)?;
        p += 0.5 * dt * force;
    }
    Some((x, p))
}

/// Evolves each sample with the symplectic leapfrog integrator.
pub fn ensemble_evolve(
    e: &PhaseSpaceEnsemble,
    pot: &PotentialSpec,
    params: &EvolutionParams,
) -> Result<PhaseSpaceEnsemble> {
    params.validate()?;
    pot.validate()?;
    if pot.derivative(0.0, params.mass).is_none() {
        return Err(Error::invalid("ensemble evolution needs a differentiable potential"));
    }
    let mut samples = Vec::with_capacity(e.len());
    for (i, s) in e.samples.iter().enumerate() {
        let (x, p) = leapfrog(s.x, s.p, pot, params)
            .ok_or_else(|| Error::invalid("potential has no derivative"))?;
        if !(x.is_finite() && p.is_finite()) {
            return Err(Error::NumericalFailure {
                message: format!("trajectory {i} became non-finite"),
                residual: None,
                step: None,
            });
        }
        samples.push(PhaseSample { x, p, ..*s });
    }
    Ok(PhaseSpaceEnsemble { samples })
}

/// Classical energy of a phase-space point.
pub fn energy(x: f64, p: f64, pot: &PotentialSpec, mass: f64) -> f64 {
    p * p / (2.0 * mass) + pot.value(x, mass)
}

/// Position bins of equal width `dx` centered on `first_center + i·dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bins {
    pub first_center: f64,
    pub dx: f64,
    pub n: usize,
}

impl Bins {
    pub fn new(first_center: f64, dx: f64, n: usize) -> Result<Self> {
        if n == 0 || !(dx > 0.0) || !first_center.is_finite() {
            return Err(Error::invalid("bins need n > 0 and dx > 0"));
        }
        Ok(Bins { first_center, dx, n })
    }

    pub fn center(&self, i: usize) -> f64 {
        self.first_center + i as f64 * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.center(i))
    }
}

/// Source of a classical position density.
#[derive(Debug, Clone, Copy)]
pub enum ClassicalSource<'a> {
    Ensemble(&'a PhaseSpaceEnsemble),
    Gaussian(&'a GaussianPhaseSpace),
    Mixture(&'a [(f64, GaussianPhaseSpace)]),
}

fn gaussian_bin_masses(d: &GaussianPhaseSpace, bins: &Bins, weight: f64, out: &mut [f64]) {
    let s = (2.0 * d.xx).sqrt();
    for (i, o) in out.iter_mut().enumerate() {
        let lo = (bins.center(i) - 0.5 * bins.dx - d.mean_x) / s;
        let hi = (bins.center(i) + 0.5 * bins.dx - d.mean_x) / s;
        *o += weight * 0.5 * (erf(hi) - erf(lo));
    }
}

/// Position density on `bins`, normalized so that `Σ density·dx = 1`.
///
/// Gaussian sources are integrated exactly over each bin; ensembles are
/// histogrammed in sample order.
pub fn classical_density(src: ClassicalSource<'_>, bins: &Bins) -> Result<Vec<f64>> {
    let mut mass = vec![0.0; bins.n];
    match src {
        ClassicalSource::Ensemble(e) => {
            for s in e.samples() {
                let k = ((s.x - bins.first_center) / bins.dx).round();
                if k >= 0.0 && (k as usize) < bins.n {
                    mass[k as usize] += s.weight;
                }
            }
        }
        ClassicalSource::Gaussian(d) => gaussian_bin_masses(d, bins, 1.0, &mut mass),
        ClassicalSource::Mixture(parts) => {
            for (w, d) in parts {
                gaussian_bin_masses(d, bins, *w, &mut mass);
            }
        }
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("no probability mass falls inside the bins"));
    }
    Ok(mass.into_iter().map(|m| m / (total * bins.dx)).collect())
}

/// Writes `x,density` rows.
pub fn write_density_csv<W: Write>(bins: &Bins, density: &[f64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,density")?;
    for (i, d) in density.iter().enumerate() {
        writeln!(w, "{},{}", fmt_f64(bins.center(i)), fmt_f64(*d))?;
    }
    Ok(())
}
