use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest spin count for the exact state-vector path.
pub const MAX_LINKING_SPINS: usize = 12;

/// Amplitude for flipping every spin of `H = Σσᶻ + g·Σσˣ` in time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorLinking {
    pub n: usize,
    pub g: f64,
    pub t: f64,
    /// `ln|⟨all-down|e^{−iHt}|all-up⟩|`, `−∞` when the sectors never link.
    pub log_amplitude: f64,
    /// Leading term of the time expansion: the `N`-th order is the first to
    /// connect the two sectors, and its `N!` orderings cancel the `1/N!`,
    /// leaving `N·ln(g·t)`.
    pub perturbative_log_estimate: f64,
}

fn apply_h(n: usize, g: f64, psi: &[Complex64], out: &mut [Complex64]) {
    for (b, o) in out.iter_mut().enumerate() {
        let up = b.count_ones() as f64;
        let mut acc = psi[b] * (2.0 * up - n as f64);
        let mut flips = Complex64::new(0.0, 0.0);
        for i in 0..n {
            flips += psi[b ^ (1 << i)];
        }
        acc += flips * g;
        *o = acc;
    }
}

/// Exact `2^N`-dimensional evolution by a scaled Taylor series.
pub fn sector_linking_amplitude(n: usize, g: f64, t: f64) -> Result<SectorLinking> {
    if n == 0 {
        return Err(Error::invalid("need at least one spin"));
    }
    if !(g.is_finite() && g >= 0.0 && t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("coupling and time must be finite and >= 0"));
    }
    if n > MAX_LINKING_SPINS {
        return Err(Error::Capacity(format!(
            "{n} spins exceed the exact limit of {MAX_LINKING_SPINS}"
        )));
    }
    let perturbative_log_estimate = n as f64 * (g * t).ln();
    let mut out = SectorLinking {
        n,
        g,
        t,
        log_amplitude: f64::NEG_INFINITY,
        perturbative_log_estimate,
    };
    if g == 0.0 || t == 0.0 {
        return Ok(out);
    }
    let dim = 1usize << n;
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[dim - 1] = Complex64::new(1.0, 0.0);
    let bound = n as f64 * (1.0 + g);
    let steps = (bound * t / 0.5).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut term = vec![Complex64::new(0.0, 0.0); dim];
    let mut next = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..steps {
        term.copy_from_slice(&psi);
        for k in 1..=60 {
            apply_h(n, g, &term, &mut next);
            let c = Complex64::new(0.0, -h / k as f64);
            let mut size = 0.0f64;
            for (tm, nx) in term.iter_mut().zip(&next) {
                *tm = nx * c;
                size = size.max(tm.norm());
            }
            for (p, tm) in psi.iter_mut().zip(&term) {
                *p += tm;
            }
            if size < 1e-30 {
                break;
            }
        }
    }
    out.log_amplitude = psi[0].norm().ln();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_spin(g: f64, t: f64) -> f64 {
        let w = (1.0 + g * g).sqrt();
        g / w * (w * t).sin().abs()
    }

    #[test]
    fn factorizes_into_single_spin_flips() {
        for &(n, g, t) in &[(1, 0.3, 0.7), (3, 1.0, 0.1), (6, 0.1, 1.0), (9, 0.5, 2.0)] {
            let r = sector_linking_amplitude(n, g, t).unwrap();
            let expected = n as f64 * single_spin(g, t).ln();
            assert!(
                ((r.log_amplitude - expected) / expected).abs() < 1e-6,
                "{n} {g} {t}: {} vs {expected}",
                r.log_amplitude
            );
        }
    }

    #[test]
    fn single_spin_small_time() {
        let r = sector_linking_amplitude(1, 1.0, 0.01).unwrap();
        let exact = single_spin(1.0, 0.01);
        assert!((r.log_amplitude.exp() / exact - 1.0).abs() < 0.01);
        assert!((r.log_amplitude.exp() / 0.01 - 1.0).abs() < 0.01);
    }

    #[test]
    fn uncoupled_sectors_never_link() {
        let r = sector_linking_amplitude(4, 0.0, 3.0).unwrap();
        assert_eq!(r.log_amplitude, f64::NEG_INFINITY);
    }

    #[test]
    fn slope_per_spin_is_log_gt() {
        let lg: Vec<f64> = (2..=8)
            .map(|n| sector_linking_amplitude(n, 1.0, 0.1).unwrap().log_amplitude)
            .collect();
        let ns: Vec<f64> = (2..=8).map(|n| n as f64).collect();
        let fit = crate::stats::linear_fit(&ns, &lg).unwrap();
        assert!((fit.slope / 0.1f64.ln() - 1.0).abs() < 0.15);
    }

    #[test]
    fn capacity_limit() {
        assert!(matches!(
            sector_linking_amplitude(13, 0.1, 1.0),
            Err(Error::Capacity(_))
        ));
        assert!(sector_linking_amplitude(0, 0.1, 1.0).is_err());
    }
}
