use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// Complex wave function sampled on a uniform periodic grid.
///
/// The number of nodes is a power of two and the stored amplitudes are
/// normalized (`Σ|ψ|²·dx = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    x_min: f64,
    dx: f64,
    amplitudes: Vec<Complex64>,
}

impl GridWavefunction {
    /// Builds a wave function from raw samples, normalizing them.
    pub fn from_samples(x_min: f64, dx: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::invalid(format!(
                "grid size must be a power of two >= 2, got {n}"
            )));
        }
        if !(dx.is_finite() && dx > 0.0 && x_min.is_finite()) {
            return Err(Error::invalid("grid needs finite x_min and dx > 0"));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("amplitudes contain non-finite values"));
        }
        let mut psi = GridWavefunction {
            x_min,
            dx,
            amplitudes,
        };
        let norm = psi.norm_sqr();
        if norm <= 0.0 {
            return Err(Error::invalid("wave function has zero norm"));
        }
        psi.scale(1.0 / norm.sqrt());
        Ok(psi)
    }

    pub fn from_fn(x_min: f64, dx: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amps = (0..n).map(|i| f(x_min + i as f64 * dx)).collect();
        Self::from_samples(x_min, dx, amps)
    }

    /// Grid of `n` nodes symmetric about the origin.
    pub fn centered(dx: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::from_fn(-0.5 * n as f64 * dx, dx, n, f)
    }

    pub(crate) fn from_raw_unchecked(x_min: f64, dx: f64, amplitudes: Vec<Complex64>) -> Self {
        GridWavefunction {
            x_min,
            dx,
            amplitudes,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.x(i))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    pub(crate) fn scale(&mut self, s: f64) {
        for a in &mut self.amplitudes {
            *a *= s;
        }
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm_sqr();
        self.scale(1.0 / n.sqrt());
    }

    pub fn same_grid(&self, other: &GridWavefunction) -> bool {
        self.len() == other.len()
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
            && (self.x_min - other.x_min).abs() <= 1e-12 * self.dx.max(self.x_min.abs())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &GridWavefunction) -> Result<Complex64> {
        if !self.same_grid(other) {
            return Err(Error::invalid("inner product of wave functions on different grids"));
        }
        let s: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.dx)
    }

    /// Complex conjugate; evolving the conjugate forward is evolving backward in time.
    pub fn conjugate(&self) -> GridWavefunction {
        GridWavefunction {
            x_min: self.x_min,
            dx: self.dx,
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_position(&self) -> f64 {
        let w: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * self.x(i))
            .sum();
        w * self.dx / self.norm_sqr()
    }

    /// Largest `|ψ|` over the first and last eight nodes.
    pub fn boundary_amplitude(&self) -> f64 {
        let n = self.len();
        let k = 8.min(n / 2);
        self.amplitudes[..k]
            .iter()
            .chain(&self.amplitudes[n - k..])
            .map(|a| a.norm())
            .fold(0.0, f64::max)
    }

    /// Writes `x,re,im` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,re,im")?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                crate::io::fmt_f64(self.x(i)),
                crate::io::fmt_f64(a.re),
                crate::io::fmt_f64(a.im)
            )?;
        }
        Ok(())
    }
}

/// Standard deviation of the position distribution, `sqrt(⟨x²⟩ − ⟨x⟩²)`.
pub fn packet_width(psi: &GridWavefunction) -> f64 {
    let norm = psi.norm_sqr();
    let mean = psi.mean_position();
    let var: f64 = psi
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let d = psi.x(i) - mean;
            a.norm_sqr() * d * d
        })
        .sum::<f64>()
        * psi.dx
        / norm;
    var.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::GaussianPacket;

    fn gaussian(center: f64, sigma: f64) -> impl Fn(f64) -> Complex64 {
        let g = GaussianPacket::new(center, sigma, 0.0).unwrap();
        move |x| g.amplitude(x)
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(GridWavefunction::from_fn(0.0, 0.1, 100, |_| Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn construction_normalizes() {
        let psi = GridWavefunction::centered(0.1, 64, |_| Complex64::new(3.0, 1.0)).unwrap();
        assert!(psi.is_normalized());
    }

    #[test]
    fn zero_state_rejected() {
        let r = GridWavefunction::centered(0.1, 64, |_| Complex64::new(0.0, 0.0));
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn width_of_sampled_gaussian() {
        let psi = GridWavefunction::centered(0.05, 1024, gaussian(0.3, 1.0)).unwrap();
        assert!((packet_width(&psi) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn width_of_separated_pair() {
        // Moment integral of an equal-weight pair with negligible overlap:
        // Var = σ² + (L/2)².
        let (sigma, big_l) = (0.5, 8.0);
        let a = gaussian(-big_l / 2.0, sigma);
        let b = gaussian(big_l / 2.0, sigma);
        let psi = GridWavefunction::centered(0.02, 2048, |x| a(x) + b(x)).unwrap();
        let expected = (sigma * sigma + big_l * big_l / 4.0).sqrt();
        assert!((packet_width(&psi) - expected).abs() < 1e-8);
    }

    #[test]
    fn width_of_uniform_box() {
        // Box of width a on a fine grid; discrete-uniform variance is
        // (n² − 1)·dx²/12 for n occupied nodes, which tends to a²/12.
        let a = 2.0;
        let dx = 1.0 / 512.0;
        let psi = GridWavefunction::centered(dx, 4096, |x| {
            if x >= -a / 2.0 && x < a / 2.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let n = a / dx;
        let discrete = ((n * n - 1.0) / 12.0).sqrt() * dx;
        assert!((packet_width(&psi) - discrete).abs() < 1e-12);
        assert!((packet_width(&psi) - a / 12f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn csv_layout() {
        let psi = GridWavefunction::centered(0.5, 4, |_| Complex64::new(1.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        psi.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,re,im"));
        assert_eq!(text.lines().count(), 5);
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }
}
