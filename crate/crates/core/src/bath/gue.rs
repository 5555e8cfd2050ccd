use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_unitary, validate_times, DecoherenceTrace, TraceSource};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Largest dimension accepted for dense eigendecomposition.
pub const MAX_DIM: usize = 2048;

/// Dense random-matrix bath: `H_A = H₀ + s·V_A`, `H_B = H₀ + s·V_B` with all
/// three matrices independent GUE draws.
///
/// `dim` stands in for the exponentially large number of internal states of
/// the body.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomMatrixBathSpec {
    pub dim: usize,
    pub perturbation_strength: f64,
    pub seed: u64,
}

impl RandomMatrixBathSpec {
    pub fn new(dim: usize, perturbation_strength: f64, seed: u64) -> Result<Self> {
        let s = RandomMatrixBathSpec {
            dim,
            perturbation_strength,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::invalid("bath dimension must be >= 2"));
        }
        if self.dim > MAX_DIM {
            return Err(Error::Capacity(format!(
                "bath dimension {} exceeds dense limit {MAX_DIM}",
                self.dim
            )));
        }
        if !(self.perturbation_strength.is_finite() && self.perturbation_strength >= 0.0) {
            return Err(Error::invalid("perturbation strength must be >= 0"));
        }
        Ok(())
    }
}

/// GUE matrix with `E|H_ij|² = 1/dim`; the lower triangle is the exact
/// conjugate of the upper one.
pub fn sample_gue<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let s = (1.0 / dim as f64).sqrt();
    let off = (0.5 / dim as f64).sqrt();
    for i in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        h[(i, i)] = Complex64::new(s * d, 0.0);
        for j in (i + 1)..dim {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(off * a, off * b);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Haar-random unit vector.
pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        Complex64::new(a, b)
    });
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

fn eigen(h: DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let e = SymmetricEigen::try_new(h, 1e-14, 10_000)
        .ok_or_else(Error::numerical_eig)?;
    Ok((e.eigenvalues.iter().cloned().collect(), e.eigenvectors))
}

impl Error {
    fn numerical_eig() -> Self {
        Error::NumericalFailure {
            message: "Hermitian eigensolver did not converge".into(),
            residual: None,
            step: None,
        }
    }
}

/// Spectral data for the two branch Hamiltonians and the shared initial state.
pub(crate) struct BranchSpectra {
    energies_a: Vec<f64>,
    energies_b: Vec<f64>,
    /// `⟨χ₀|a_j⟩` conjugated, i.e. `conj(a_j)` with `a_j = ⟨a_j|χ₀⟩`.
    coeff_a_conj: Vec<Complex64>,
    coeff_b: Vec<Complex64>,
    /// `⟨a_j|b_k⟩`.
    cross: DMatrix<Complex64>,
}

impl BranchSpectra {
    pub(crate) fn build(spec: &RandomMatrixBathSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = rng_from_seed(spec.seed);
        let d = spec.dim;
        let h0 = sample_gue(d, &mut rng);
        let va = sample_gue(d, &mut rng);
        let vb = sample_gue(d, &mut rng);
        let chi = random_state(d, &mut rng);
        let s = Complex64::new(spec.perturbation_strength, 0.0);
        let (ea, ua) = eigen(&h0 + &va * s)?;
        let (eb, ub) = eigen(&h0 + &vb * s)?;
        let a = ua.adjoint() * &chi;
        let b = ub.adjoint() * &chi;
        let cross = ua.adjoint() * ub;
        Ok(BranchSpectra {
            energies_a: ea,
            energies_b: eb,
            coeff_a_conj: a.iter().map(|z| z.conj()).collect(),
            coeff_b: b.iter().cloned().collect(),
            cross,
        })
    }

    /// `Σ_jk conj(a_j) e^{iE^A_j t} ⟨a_j|b_k⟩ b_k e^{−iE^B_k t}`.
    pub(crate) fn overlap_at(&self, t: f64, work: &mut Vec<Complex64>) -> Complex64 {
        let d = self.energies_b.len();
        work.clear();
        work.extend(
            self.coeff_b
                .iter()
                .zip(&self.energies_b)
                .map(|(b, e)| b * Complex64::from_polar(1.0, -e * t)),
        );
        let mut r = Complex64::new(0.0, 0.0);
        for j in 0..d {
            let mut row = Complex64::new(0.0, 0.0);
            for (k, w) in work.iter().enumerate() {
                row += self.cross[(j, k)] * w;
            }
            r += self.coeff_a_conj[j] * Complex64::from_polar(1.0, self.energies_a[j] * t) * row;
        }
        r
    }
}

/// Decoherence factor of a seeded state evolved under the two branch Hamiltonians.
pub fn gue_bath_trace(spec: &RandomMatrixBathSpec, times: &[f64]) -> Result<DecoherenceTrace> {
    validate_times(times)?;
    let spectra = BranchSpectra::build(spec)?;
    let mut work = Vec::with_capacity(spec.dim);
    let r_values: Vec<Complex64> = times.iter().map(|&t| spectra.overlap_at(t, &mut work)).collect();
    check_unitary(&r_values)?;
    Ok(DecoherenceTrace {
        times: times.to_vec(),
        r_values,
        source: TraceSource::RandomMatrix(spec.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::uniform_times;

    #[test]
    fn sampled_matrix_is_exactly_hermitian() {
        let mut rng = rng_from_seed(5);
        let h = sample_gue(16, &mut rng);
        assert_eq!(h, h.adjoint());
    }

    #[test]
    fn offdiagonal_variance_is_one_over_dim() {
        let mut rng = rng_from_seed(8);
        let d = 200;
        let h = sample_gue(d, &mut rng);
        let mut s = 0.0;
        let mut count = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                s += h[(i, j)].norm_sqr();
                count += 1.0;
            }
        }
        assert!((s / count * d as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn starts_at_one_and_is_unitary() {
        let spec = RandomMatrixBathSpec::new(24, 0.5, 11).unwrap();
        let tr = gue_bath_trace(&spec, &uniform_times(50.0, 201).unwrap()).unwrap();
        assert!((tr.r_values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(tr.r_values.iter().all(|r| r.norm() <= 1.0 + 1e-10));
    }

    #[test]
    fn identical_branches_stay_coherent() {
        let spec = RandomMatrixBathSpec::new(16, 0.0, 2).unwrap();
        let tr = gue_bath_trace(&spec, &uniform_times(30.0, 61).unwrap()).unwrap();
        assert!(tr.r_values.iter().all(|r| (r.norm() - 1.0).abs() < 1e-10));
    }

    #[test]
    fn reproducible_from_seed() {
        let spec = RandomMatrixBathSpec::new(8, 0.5, 77).unwrap();
        let t = uniform_times(10.0, 11).unwrap();
        assert_eq!(gue_bath_trace(&spec, &t).unwrap(), gue_bath_trace(&spec, &t).unwrap());
    }

    #[test]
    fn plateau_near_inverse_sqrt_dim() {
        // Monte Carlo over 20 seeds: mean |r| over the late half.
        let d = 64;
        let times = uniform_times(400.0, 2001).unwrap();
        let mut acc = 0.0;
        for seed in 0..20 {
            let spec = RandomMatrixBathSpec::new(d, 0.5, 1000 + seed).unwrap();
            let abs = gue_bath_trace(&spec, &times).unwrap().abs_values();
            let half = &abs[abs.len() / 2..];
            acc += half.iter().sum::<f64>() / half.len() as f64;
        }
        let mean = acc / 20.0;
        let scale = 1.0 / (d as f64).sqrt();
        assert!(mean > scale / 3.0 && mean < 3.0 * scale, "{mean}");
    }

    #[test]
    fn overflowing_phases_are_reported() {
        let spec = RandomMatrixBathSpec::new(4, 1e307, 1).unwrap();
        let err = gue_bath_trace(&spec, &uniform_times(200.0, 11).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure { step: Some(_), .. }));
    }

    #[test]
    fn limits_enforced() {
        assert!(RandomMatrixBathSpec::new(1, 0.5, 0).is_err());
        assert!(matches!(
            RandomMatrixBathSpec::new(4096, 0.5, 0),
            Err(Error::Capacity(_))
        ));
    }
}
