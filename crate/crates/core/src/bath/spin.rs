use num_complex::Complex64;
use rand::Rng;

use super::{check_unitary, validate_times, DecoherenceTrace, TraceSource};
use crate::dynamics::com::ComSplit;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingPattern {
    Uniform(f64),
    RandomUniform { min: f64, max: f64, seed: u64 },
}

/// `N` two-level clusters, each split by `±δ_i/2` depending on the branch.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBathSpec {
    pub detunings: Vec<f64>,
    pub pattern: CouplingPattern,
}

impl SpinBathSpec {
    pub fn new(n: usize, pattern: CouplingPattern) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("spin bath needs at least one cluster"));
        }
        let detunings = match &pattern {
            CouplingPattern::Uniform(d) => {
                if !d.is_finite() {
                    return Err(Error::invalid("detuning must be finite"));
                }
                vec![*d; n]
            }
            CouplingPattern::RandomUniform { min, max, seed } => {
                if !(min.is_finite() && max.is_finite() && min <= max) {
                    return Err(Error::invalid("detuning range needs min <= max"));
                }
                let mut rng = rng_from_seed(*seed);
                (0..n)
                    .map(|_| min + (max - min) * rng.random::<f64>())
                    .collect()
            }
        };
        Ok(SpinBathSpec { detunings, pattern })
    }

    pub fn uniform(n: usize, delta: f64) -> Result<Self> {
        Self::new(n, CouplingPattern::Uniform(delta))
    }

    /// Uniform bath whose total splitting equals the residual coupling of a
    /// center-of-mass split, shared over `n` clusters.
    pub fn from_com_split(n: usize, split: &ComSplit) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("spin bath needs at least one cluster"));
        }
        Self::uniform(n, split.residual_coupling_norm / n as f64)
    }

    pub fn n_clusters(&self) -> usize {
        self.detunings.len()
    }
}

/// `r(t) = Π_i cos(δ_i t / 2)`; fails only if `δ_i t` overflows.
///
/// Each cluster starts in an equal superposition and evolves under `+δ_i σ_z/2`
/// on one branch and `−δ_i σ_z/2` on the other; the per-cluster overlap is
/// then `cos(δ_i t/2)` exactly.
pub fn spin_bath_trace(spec: &SpinBathSpec, times: &[f64]) -> Result<DecoherenceTrace> {
    validate_times(times)?;
    let r_values = times
        .iter()
        .map(|&t| {
            let r: f64 = spec.detunings.iter().map(|d| (0.5 * d * t).cos()).product();
            Complex64::new(r, 0.0)
        })
        .collect::<Vec<_>>();
    check_unitary(&r_values)?;
    Ok(DecoherenceTrace {
        times: times.to_vec(),
        r_values,
        source: TraceSource::Spin(spec.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::uniform_times;
    use std::f64::consts::PI;

    #[test]
    fn starts_at_one() {
        let s = SpinBathSpec::uniform(7, 0.3).unwrap();
        let tr = spin_bath_trace(&s, &[0.0]).unwrap();
        assert_eq!(tr.r_values[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn single_spin_node() {
        let s = SpinBathSpec::uniform(1, PI).unwrap();
        let tr = spin_bath_trace(&s, &[1.0]).unwrap();
        assert!(tr.r_values[0].norm() < 1e-15);
    }

    #[test]
    fn twenty_uniform_spins() {
        let s = SpinBathSpec::uniform(20, 1.0).unwrap();
        let tr = spin_bath_trace(&s, &[1.0]).unwrap();
        let expected = 0.5f64.cos().powi(20);
        assert!((tr.r_values[0].re - expected).abs() < 1e-15);
        assert!((expected - 0.0734).abs() < 5e-5);
    }

    #[test]
    fn zero_detuning_never_decoheres() {
        let s = SpinBathSpec::uniform(50, 0.0).unwrap();
        let tr = spin_bath_trace(&s, &uniform_times(100.0, 101).unwrap()).unwrap();
        assert!(tr.r_values.iter().all(|r| *r == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn random_detunings_are_seeded() {
        let p = CouplingPattern::RandomUniform { min: 0.5, max: 1.5, seed: 3 };
        let a = SpinBathSpec::new(8, p.clone()).unwrap();
        let b = SpinBathSpec::new(8, p).unwrap();
        assert_eq!(a, b);
        assert!(a.detunings.iter().all(|d| (0.5..=1.5).contains(d)));
    }

    #[test]
    fn short_time_gaussian_decay() {
        // −ln|r| = N δ² t²/8 + O(t⁴): least-squares fit of the t² coefficient.
        let (n, delta) = (100, 1.0);
        let s = SpinBathSpec::uniform(n, delta).unwrap();
        let times = uniform_times(0.1, 51).unwrap();
        let tr = spin_bath_trace(&s, &times).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (t, r) in times.iter().zip(&tr.r_values) {
            let y = -r.norm().ln();
            num += y * t * t;
            den += t * t * t * t;
        }
        let coef = num / den;
        let expected = n as f64 * delta * delta / 8.0;
        assert!((coef / expected - 1.0).abs() < 0.05);
    }
}
