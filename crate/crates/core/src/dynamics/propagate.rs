use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::GridWavefunction;
use super::potential::{EvolutionParams, PotentialSpec};
use crate::error::{Error, Result};
use crate::states::{wrap_phase, GaussianPacket};

/// Exact evolution of a Gaussian packet under a free, linear or harmonic
/// potential for `params.total_time()`.
///
/// Uses the linearized width pair `(Q, P)` with `Q̇ = P/m`, `Ṗ = −V''Q`; the
/// width coefficient is `A = −iP/(2Q)`, the amplitude carries `Q^{-1/2}` and
/// the center follows the classical trajectory with its action as phase.
pub fn analytic_gaussian_evolve(
    g: &GaussianPacket,
    params: &EvolutionParams,
    pot: &PotentialSpec,
) -> Result<GaussianPacket> {
    params.validate()?;
    evolve_gaussian_for(g, params.total_time(), params.mass, pot)
}

/// As [`analytic_gaussian_evolve`] for an arbitrary (possibly negative) time.
pub fn evolve_gaussian_for(
    g: &GaussianPacket,
    t: f64,
    mass: f64,
    pot: &PotentialSpec,
) -> Result<GaussianPacket> {
    g.validate()?;
    pot.validate()?;
    if !(mass > 0.0 && t.is_finite()) {
        return Err(Error::invalid("evolution needs mass > 0 and finite time"));
    }
    if t == 0.0 {
        return Ok(*g);
    }
    let a0 = g.width_coefficient();
    let p0 = 2.0 * Complex64::i() * a0;
    let (x0, k0) = (g.center, g.momentum);
    let (q, p, xt, kt, action, winding) = match pot {
        PotentialSpec::Free => {
            let q = 1.0 + p0 * t / mass;
            (q, p0, x0 + k0 * t / mass, k0, k0 * k0 * t / (2.0 * mass), q.arg())
        }
        PotentialSpec::Linear { slope } => {
            let s = *slope;
            let q = 1.0 + p0 * t / mass;
            let xt = x0 + k0 * t / mass - s * t * t / (2.0 * mass);
            let kt = k0 - s * t;
            let action = k0 * k0 * t / (2.0 * mass) - s * k0 * t * t / mass
                + s * s * t * t * t / (3.0 * mass)
                - s * x0 * t;
            (q, p0, xt, kt, action, q.arg())
        }
        PotentialSpec::Harmonic { omega, center } => {
            let w = *omega;
            let (sn, cs) = (w * t).sin_cos();
            let q = cs + p0 * sn / (mass * w);
            let p = p0 * cs - mass * w * sn;
            let y0 = x0 - center;
            let yt = y0 * cs + k0 * sn / (mass * w);
            let kt = k0 * cs - mass * w * y0 * sn;
            // Quadratic Lagrangian: S = ½(y p)|₀ᵗ along the solution.
            let action = 0.5 * (yt * kt - y0 * k0);
            (q, p, center + yt, kt, action, harmonic_winding(q, w * t))
        }
        _ => {
            return Err(Error::invalid(
                "closed-form Gaussian evolution needs a free, linear or harmonic potential",
            ))
        }
    };
    let a = -Complex64::i() * p / (2.0 * q);
    let phase = wrap_phase(g.phase + action - 0.5 * winding);
    Ok(GaussianPacket::from_width_coefficient(xt, kt, phase, a))
}

/// Continuous argument of `Q(τ) = cos τ + c·sin τ` (`Im c > 0`), which winds
/// counter-clockwise once per period.
fn harmonic_winding(q: Complex64, tau: f64) -> f64 {
    let turns = (tau / (2.0 * PI)).floor();
    let mut principal = q.arg();
    let reduced = tau - turns * 2.0 * PI;
    if principal < 0.0 || (principal == 0.0 && reduced > PI) {
        principal += 2.0 * PI;
    }
    if reduced == 0.0 {
        principal = 0.0;
    }
    turns * 2.0 * PI + principal
}

/// Health information collected while propagating on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// `dt` exceeds the `0.1·m·dx²` guidance.
    pub dt_above_guidance: bool,
    /// Largest `|ψ|` seen in the boundary nodes; should stay below `1e-12`.
    pub max_boundary_amplitude: f64,
    pub norm_drift: f64,
}

/// Strang-split propagator (half potential, spectral kinetic, half potential)
/// with precomputed phase factors.
pub struct SplitStepPropagator {
    n: usize,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    params: EvolutionParams,
    dx: f64,
}

/// Angular wavenumbers of an `n`-point periodic grid in FFT order.
pub(crate) fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * dx);
    (0..n)
        .map(|j| {
            let j = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            j * dk
        })
        .collect()
}

impl SplitStepPropagator {
    pub fn new(psi: &GridWavefunction, params: &EvolutionParams, pot: &PotentialSpec) -> Result<Self> {
        params.validate()?;
        let n = psi.len();
        let v = pot.sample(psi.x_min(), psi.dx(), n, params.mass)?;
        let half_potential = v
            .iter()
            .map(|&vi| Complex64::from_polar(1.0, -0.5 * vi * params.dt))
            .collect();
        let kinetic = wavenumbers(n, psi.dx())
            .into_iter()
            .map(|k| Complex64::from_polar(1.0, -k * k / (2.0 * params.mass) * params.dt))
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        Ok(SplitStepPropagator {
            n,
            half_potential,
            kinetic,
            fft,
            ifft,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            params: *params,
            dx: psi.dx(),
        })
    }

    fn step(&mut self, amps: &mut [Complex64]) {
        let inv_n = 1.0 / self.n as f64;
        for (a, h) in amps.iter_mut().zip(&self.half_potential) {
            *a *= h;
        }
        self.fft.process_with_scratch(amps, &mut self.scratch);
        for (a, k) in amps.iter_mut().zip(&self.kinetic) {
            *a *= k * inv_n;
        }
        self.ifft.process_with_scratch(amps, &mut self.scratch);
        for (a, h) in amps.iter_mut().zip(&self.half_potential) {
            *a *= h;
        }
    }

    /// Propagates `psi` by `n_steps` steps in place.
    pub fn run(&mut self, psi: &mut GridWavefunction, n_steps: usize) -> Result<Diagnostics> {
        if psi.len() != self.n || (psi.dx() - self.dx).abs() > 1e-12 * self.dx {
            return Err(Error::invalid("wave function grid differs from propagator grid"));
        }
        let norm0 = psi.norm_sqr();
        let mut max_boundary = psi.boundary_amplitude();
        for step in 0..n_steps {
            self.step(psi.amplitudes_mut());
            if step % 64 == 63 || step + 1 == n_steps {
                if psi
                    .amplitudes()
                    .iter()
                    .any(|a| !a.re.is_finite() || !a.im.is_finite())
                {
                    return Err(Error::NumericalFailure {
                        message: format!("non-finite amplitude at step {step}"),
                        residual: None,
                        step: Some(step),
                    });
                }
                max_boundary = max_boundary.max(psi.boundary_amplitude());
            }
        }
        Ok(Diagnostics {
            dt_above_guidance: self.params.dt > 0.1 * self.params.mass * self.dx * self.dx,
            max_boundary_amplitude: max_boundary,
            norm_drift: (psi.norm_sqr() - norm0).abs(),
        })
    }
}

/// Strang split-step propagation for `params.n_steps` steps of `params.dt`.
pub fn split_step_evolve(
    psi: &GridWavefunction,
    params: &EvolutionParams,
    pot: &PotentialSpec,
) -> Result<GridWavefunction> {
    split_step_evolve_with_diagnostics(psi, params, pot).map(|(p, _)| p)
}

pub fn split_step_evolve_with_diagnostics(
    psi: &GridWavefunction,
    params: &EvolutionParams,
    pot: &PotentialSpec,
) -> Result<(GridWavefunction, Diagnostics)> {
    let mut prop = SplitStepPropagator::new(psi, params, pot)?;
    let mut out = psi.clone();
    let diag = prop.run(&mut out, params.n_steps)?;
    Ok((out, diag))
}

/// Settings for imaginary-time relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxOptions {
    /// Imaginary time steps, used in sequence from coarse to fine.
    pub schedule: Vec<f64>,
    /// Convergence threshold on the energy change between checks.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions {
            schedule: vec![0.05, 0.01, 0.002, 0.0005],
            tolerance: 1e-13,
            max_iterations: 400_000,
        }
    }
}

/// Energy `⟨ψ|T + V|ψ⟩` evaluated spectrally.
pub(crate) fn grid_energy(psi: &GridWavefunction, v: &[f64], mass: f64) -> f64 {
    let n = psi.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf = psi.amplitudes().to_vec();
    fft.process(&mut buf);
    let k = wavenumbers(n, psi.dx());
    let kinetic: f64 = buf
        .iter()
        .zip(&k)
        .map(|(a, k)| a.norm_sqr() * k * k / (2.0 * mass))
        .sum::<f64>()
        * psi.dx()
        / n as f64;
    let potential: f64 = psi
        .amplitudes()
        .iter()
        .zip(v)
        .map(|(a, v)| a.norm_sqr() * v)
        .sum::<f64>()
        * psi.dx();
    (kinetic + potential) / psi.norm_sqr()
}

/// Ground state of `p²/2m + v` on the grid of `initial` by imaginary-time
/// Strang splitting, refined through `opts.schedule`.
pub fn relax_ground_state(
    initial: &GridWavefunction,
    v: &[f64],
    mass: f64,
    opts: &RelaxOptions,
) -> Result<GridWavefunction> {
    if v.len() != initial.len() {
        return Err(Error::invalid("potential length differs from grid"));
    }
    if opts.schedule.is_empty() || opts.schedule.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::invalid("relaxation schedule needs positive steps"));
    }
    let n = initial.len();
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let k = wavenumbers(n, initial.dx());
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut psi = initial.clone();
    let mut iterations = 0usize;
    let check_every = 20;
    for &tau in &opts.schedule {
        let half: Vec<f64> = v.iter().map(|&vi| (-(vi - vmin) * tau * 0.5).exp()).collect();
        let kin: Vec<f64> = k
            .iter()
            .map(|k| (-k * k / (2.0 * mass) * tau).exp() / n as f64)
            .collect();
        let mut e_prev = grid_energy(&psi, v, mass);
        loop {
            for _ in 0..check_every {
                let a = psi.amplitudes_mut();
                for (x, h) in a.iter_mut().zip(&half) {
                    *x *= h;
                }
                fft.process(a);
                for (x, kk) in a.iter_mut().zip(&kin) {
                    *x *= kk;
                }
                ifft.process(a);
                for (x, h) in a.iter_mut().zip(&half) {
                    *x *= h;
                }
                psi.renormalize();
            }
            iterations += check_every;
            let e = grid_energy(&psi, v, mass);
            if !e.is_finite() {
                return Err(Error::NumericalFailure {
                    message: "relaxation produced a non-finite energy".into(),
                    residual: Some(e),
                    step: Some(iterations),
                });
            }
            let residual = (e - e_prev).abs();
            e_prev = e;
            if residual < opts.tolerance {
                break;
            }
            if iterations >= opts.max_iterations {
                return Err(Error::NumericalFailure {
                    message: format!("relaxation did not converge in {iterations} iterations"),
                    residual: Some(residual),
                    step: Some(iterations),
                });
            }
        }
    }
    Ok(GridWavefunction::from_raw_unchecked(
        psi.x_min(),
        psi.dx(),
        psi.amplitudes().to_vec(),
    ))
}
