use crate::error::{Error, Result};

/// External potential acting on a single coordinate.
///
/// Energies are absolute (not per unit mass) except for [`PotentialSpec::Harmonic`],
/// whose curvature is `mass * omega^2` so that the oscillation period is
/// `2π/ω` for any mass.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Free,
    /// `½·m·ω²·(x − center)²`
    Harmonic { omega: f64, center: f64 },
    /// `slope·x`; the force is `−slope`.
    Linear { slope: f64 },
    /// Two flat barriers of the given height and width, centered at `±separation/2`.
    DoubleBarrier {
        separation: f64,
        width: f64,
        height: f64,
    },
    /// Samples on a uniform grid, linearly interpolated between nodes.
    Tabulated {
        x_min: f64,
        dx: f64,
        values: Vec<f64>,
    },
}

impl PotentialSpec {
    pub fn harmonic(omega: f64) -> Self {
        PotentialSpec::Harmonic { omega, center: 0.0 }
    }

    pub fn linear(slope: f64) -> Self {
        PotentialSpec::Linear { slope }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Free => Ok(()),
            PotentialSpec::Harmonic { omega, center } => {
                if !(omega.is_finite() && *omega > 0.0 && center.is_finite()) {
                    return Err(Error::invalid(format!(
                        "harmonic potential needs finite omega > 0, got {omega}"
                    )));
                }
                Ok(())
            }
            PotentialSpec::Linear { slope } => {
                if !slope.is_finite() {
                    return Err(Error::invalid("linear slope must be finite"));
                }
                Ok(())
            }
            PotentialSpec::DoubleBarrier {
                separation,
                width,
                height,
            } => {
                if !(*separation > 0.0 && *width > 0.0 && height.is_finite()) {
                    return Err(Error::invalid(
                        "double barrier needs separation > 0, width > 0, finite height",
                    ));
                }
                Ok(())
            }
            PotentialSpec::Tabulated { x_min, dx, values } => {
                if values.len() < 2 || !(*dx > 0.0) || !x_min.is_finite() {
                    return Err(Error::invalid(
                        "tabulated potential needs at least two samples and dx > 0",
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("tabulated potential contains non-finite values"));
                }
                Ok(())
            }
        }
    }

    /// True for the kinds whose Gaussian evolution is exact in closed form.
    pub fn is_quadratic(&self) -> bool {
        matches!(
            self,
            PotentialSpec::Free | PotentialSpec::Harmonic { .. } | PotentialSpec::Linear { .. }
        )
    }

    pub fn value(&self, x: f64, mass: f64) -> f64 {
        match self {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Harmonic { omega, center } => {
                0.5 * mass * omega * omega * (x - center) * (x - center)
            }
            PotentialSpec::Linear { slope } => slope * x,
            PotentialSpec::DoubleBarrier {
                separation,
                width,
                height,
            } => {
                let half = 0.5 * separation;
                if (x - half).abs() <= 0.5 * width || (x + half).abs() <= 0.5 * width {
                    *height
                } else {
                    0.0
                }
            }
            PotentialSpec::Tabulated { x_min, dx, values } => {
                let s = (x - x_min) / dx;
                let last = values.len() - 1;
                if s <= 0.0 {
                    values[0]
                } else if s >= last as f64 {
                    values[last]
                } else {
                    let i = s.floor() as usize;
                    let frac = s - i as f64;
                    values[i] * (1.0 - frac) + values[i + 1] * frac
                }
            }
        }
    }

    /// First derivative, where the kind defines one.
    ///
    /// Tabulated potentials use central differences of the interpolant; the
    /// double barrier has no derivative.
    pub fn derivative(&self, x: f64, mass: f64) -> Option<f64> {
        match self {
            PotentialSpec::Free => Some(0.0),
            PotentialSpec::Harmonic { omega, center } => Some(mass * omega * omega * (x - center)),
            PotentialSpec::Linear { slope } => Some(*slope),
            PotentialSpec::DoubleBarrier { .. } => None,
            PotentialSpec::Tabulated { dx, .. } => {
                let h = 0.5 * dx;
                Some((self.value(x + h, mass) - self.value(x - h, mass)) / (2.0 * h))
            }
        }
    }

    pub fn second_derivative(&self, x: f64, mass: f64) -> Option<f64> {
        match self {
            PotentialSpec::Free | PotentialSpec::Linear { .. } => Some(0.0),
            PotentialSpec::Harmonic { omega, .. } => Some(mass * omega * omega),
            PotentialSpec::DoubleBarrier { .. } => None,
            PotentialSpec::Tabulated { dx, .. } => {
                let h = *dx;
                Some(
                    (self.value(x + h, mass) - 2.0 * self.value(x, mass) + self.value(x - h, mass))
                        / (h * h),
                )
            }
        }
    }

    /// Samples the potential at the nodes of a grid.
    ///
    /// A tabulated potential must share the grid's geometry exactly.
    pub fn sample(&self, x_min: f64, dx: f64, n: usize, mass: f64) -> Result<Vec<f64>> {
        self.validate()?;
        if let PotentialSpec::Tabulated {
            x_min: tx,
            dx: tdx,
            values,
        } = self
        {
            if values.len() != n {
                return Err(Error::invalid(format!(
                    "tabulated potential has {} samples, grid has {n}",
                    values.len()
                )));
            }
            if (tx - x_min).abs() > 1e-12 * dx.max(1.0) || (tdx - dx).abs() > 1e-12 * dx {
                return Err(Error::invalid("tabulated potential geometry differs from grid"));
            }
            return Ok(values.clone());
        }
        Ok((0..n)
            .map(|i| self.value(x_min + i as f64 * dx, mass))
            .collect())
    }
}

/// Time stepping parameters shared by the quantum and classical propagators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParams {
    pub dt: f64,
    pub n_steps: usize,
    /// Mass of the propagated coordinate; `N·m` for a collective coordinate.
    pub mass: f64,
}

impl EvolutionParams {
    pub fn new(dt: f64, n_steps: usize, mass: f64) -> Result<Self> {
        let p = EvolutionParams { dt, n_steps, mass };
        p.validate()?;
        Ok(p)
    }

    /// Steps of size `dt` covering `total_time` (rounded to the nearest step).
    pub fn over(total_time: f64, dt: f64, mass: f64) -> Result<Self> {
        if !(total_time >= 0.0) {
            return Err(Error::invalid("total time must be nonnegative"));
        }
        Self::new(dt, (total_time / dt).round() as usize, mass)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::invalid(format!("mass must be > 0, got {}", self.mass)));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}
