use std::f64::consts::PI;

use super::potential::PotentialSpec;
use crate::error::{Error, Result};

/// Center-of-mass decomposition of `Σ u_i(x_i)` around an expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct ComSplit {
    pub total_mass: f64,
    /// `X ↦ Σ u_i(X)` up to an additive constant, for a coordinate of mass `total_mass`.
    pub com_potential: PotentialSpec,
    /// Size of the neglected coupling between `X` and the internal offsets `Δ_i`.
    pub residual_coupling_norm: f64,
    /// `Σ u_i''`, the stiffness of the collective potential.
    pub stiffness: f64,
    /// `Σ u_i'(expansion_point)`.
    pub force_gradient: f64,
}

/// Splits constituent potentials into a collective potential and a residual
/// coupling.
///
/// Writing `x_i = X + Δ_i` with `Σ m_i Δ_i = 0`, the coupling left over after
/// the collective force is removed is
/// `Σ (u_i'(X) − m_i F/M) Δ_i + ½ Σ u_i''(X) Δ_i² + …` with `F = Σ u_i'(X)`.
/// Its norm is estimated with `E|Δ_i| = s_i·√(2/π)` and `E[Δ_i²] = s_i²` for
/// Gaussian internal spreads of standard deviation `s_i` (`1` when `spreads`
/// is `None`).
///
/// Constituent harmonic potentials have stiffness `m_i ω_i²`.
pub fn split_com(
    masses: &[f64],
    potentials: &[PotentialSpec],
    expansion_point: f64,
    spreads: Option<&[f64]>,
) -> Result<ComSplit> {
    if masses.is_empty() {
        return Err(Error::invalid("need at least one constituent"));
    }
    if masses.len() != potentials.len() {
        return Err(Error::invalid("masses and potentials differ in length"));
    }
    if let Some(s) = spreads {
        if s.len() != masses.len() || s.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("spreads must be nonnegative, one per constituent"));
        }
    }
    if masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(Error::invalid("masses must be positive"));
    }
    let mut slopes = Vec::with_capacity(masses.len());
    let mut curvatures = Vec::with_capacity(masses.len());
    // Collective potential ½K X² + B X (constant dropped).
    let (mut k_sum, mut b_sum) = (0.0, 0.0);
    for (u, &m) in potentials.iter().zip(masses) {
        u.validate()?;
        let (k, b) = match u {
            PotentialSpec::Free => (0.0, 0.0),
            PotentialSpec::Linear { slope } => (0.0, *slope),
            PotentialSpec::Harmonic { omega, center } => {
                let k = m * omega * omega;
                (k, -k * center)
            }
            PotentialSpec::Tabulated { .. } | PotentialSpec::DoubleBarrier { .. } => {
                return Err(Error::invalid(
                    "collective expansion needs analytic potentials with derivatives",
                ))
            }
        };
        k_sum += k;
        b_sum += b;
        slopes.push(k * expansion_point + b);
        curvatures.push(k);
    }
    let total_mass: f64 = masses.iter().sum();
    let force_gradient: f64 = slopes.iter().sum();
    let mean_abs = (2.0 / PI).sqrt();
    let residual_coupling_norm = masses
        .iter()
        .zip(&slopes)
        .zip(&curvatures)
        .enumerate()
        .map(|(i, ((&m, &d1), &d2))| {
            let s = spreads.map_or(1.0, |s| s[i]);
            let first = (d1 - m / total_mass * force_gradient).abs() * s * mean_abs;
            first + 0.5 * d2.abs() * s * s
        })
        .sum();
    let com_potential = if k_sum > 0.0 {
        PotentialSpec::Harmonic {
            omega: (k_sum / total_mass).sqrt(),
            center: -b_sum / k_sum,
        }
    } else if b_sum != 0.0 {
        PotentialSpec::Linear { slope: b_sum }
    } else {
        PotentialSpec::Free
    };
    Ok(ComSplit {
        total_mass,
        com_potential,
        residual_coupling_norm,
        stiffness: k_sum,
        force_gradient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_linear_has_no_residual() {
        let n = 50;
        let f = 0.3;
        let s = split_com(&vec![1.0; n], &vec![PotentialSpec::linear(f); n], 0.7, None).unwrap();
        assert_eq!(s.total_mass, 50.0);
        match s.com_potential {
            PotentialSpec::Linear { slope } => assert!((slope - n as f64 * f).abs() < 1e-12),
            ref other => panic!("{other:?}"),
        }
        assert!(s.residual_coupling_norm.abs() < 1e-12);
    }

    #[test]
    fn mixed_slopes_leave_residual() {
        let n = 10;
        let f = 0.5;
        let pots: Vec<_> = (0..n)
            .map(|i| PotentialSpec::linear(if i % 2 == 0 { f } else { -f }))
            .collect();
        let s = split_com(&vec![1.0; n], &pots, 0.0, None).unwrap();
        assert_eq!(s.com_potential, PotentialSpec::Free);
        // Direct sum: each constituent contributes |±f|·√(2/π).
        let direct: f64 = (0..n).map(|_| f * (2.0 / PI).sqrt()).sum();
        assert!((s.residual_coupling_norm - direct).abs() < 1e-12);
    }

    #[test]
    fn harmonic_stiffness_adds() {
        let (n, k, a) = (8, 2.0f64, 1.5);
        let pots = vec![PotentialSpec::Harmonic { omega: k.sqrt(), center: a }; n];
        let spreads = vec![0.3; n];
        let s = split_com(&vec![1.0; n], &pots, a, Some(&spreads)).unwrap();
        assert!((s.stiffness - n as f64 * k).abs() < 1e-12);
        match s.com_potential {
            PotentialSpec::Harmonic { omega, center } => {
                assert!((s.total_mass * omega * omega - n as f64 * k).abs() < 1e-12);
                assert!((center - a).abs() < 1e-12);
            }
            ref other => panic!("{other:?}"),
        }
        // Expansion at the minimum: only Σ ½k·Var(Δ_i) remains.
        let expected = n as f64 * 0.5 * k * 0.09;
        assert!((s.residual_coupling_norm - expected).abs() < 1e-12);
    }

    #[test]
    fn tabulated_rejected() {
        let t = PotentialSpec::Tabulated {
            x_min: 0.0,
            dx: 1.0,
            values: vec![0.0, 1.0],
        };
        assert!(matches!(
            split_com(&[1.0], &[t], 0.0, None),
            Err(Error::InvalidArgument(_))
        ));
        assert!(split_com(&[], &[], 0.0, None).is_err());
    }
}
