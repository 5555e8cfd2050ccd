//! Von Neumann measurement: a two-state micro-system correlated with a
//! pointer made of a collective coordinate and an internal product state.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::bath::gue::random_state;
use crate::double_slit::branch_internal_states;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::rng::{derive_seed, rng_from_seed};
use crate::states::{gaussian_log_overlap, product_overlap, wrap_phase, GaussianPacket, ProductState};

const NORM_TOL: f64 = 1e-12;

/// `α|↑⟩ + β|↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl MicroState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let m = MicroState { alpha, beta };
        m.validate()?;
        Ok(m)
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("micro-state norm² is {n}, not 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointerLabel {
    Plus,
    Minus,
    Ready,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointerState {
    pub collective: GaussianPacket,
    pub internal: ProductState,
    pub label: PointerLabel,
}

/// Complex logarithm of `⟨a|b⟩` for two pointer states.
pub fn pointer_log_overlap(a: &PointerState, b: &PointerState) -> Result<Complex64> {
    let c = gaussian_log_overlap(&a.collective, &b.collective)?;
    let i = product_overlap(&a.internal, &b.internal)?;
    Ok(Complex64::new(c.re + i.log_magnitude, wrap_phase(c.im + i.phase)))
}

/// `α|↑⟩⊗|+⟩ + β|↓⟩⊗|−⟩`, kept as branch amplitudes and pointer states.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub micro: MicroState,
    pub plus: PointerState,
    pub minus: PointerState,
    /// `ln⟨−|+⟩`.
    pub log_pointer_overlap: Complex64,
}

impl Composite {
    /// `‖Ψ‖²`. The cross term `2Re(ᾱβ⟨↑|↓⟩⟨+|−⟩)` vanishes identically because
    /// the micro-states are orthogonal, whatever the pointer overlap.
    pub fn norm_sqr(&self) -> f64 {
        self.micro.alpha.norm_sqr() + self.micro.beta.norm_sqr()
    }

    /// Whether the composite is a single product term.
    pub fn is_single_branch(&self) -> bool {
        self.micro.alpha == Complex64::new(0.0, 0.0) || self.micro.beta == Complex64::new(0.0, 0.0)
    }

    pub fn abs_pointer_overlap(&self) -> f64 {
        self.log_pointer_overlap.re.exp()
    }
}

/// Records the correlated state produced by an ideal measurement interaction
/// that starts from the `ready` pointer.
pub fn entangle(
    micro: MicroState,
    ready: &PointerState,
    plus: PointerState,
    minus: PointerState,
) -> Result<Composite> {
    micro.validate()?;
    for p in [ready, &plus, &minus] {
        p.collective.validate()?;
    }
    let n = plus.internal.n_clusters();
    if minus.internal.n_clusters() != n || ready.internal.n_clusters() != n {
        return Err(Error::invalid(format!(
            "pointer cluster counts differ: ready {}, plus {n}, minus {}",
            ready.internal.n_clusters(),
            minus.internal.n_clusters()
        )));
    }
    let log_pointer_overlap = pointer_log_overlap(&minus, &plus)?;
    Ok(Composite {
        micro,
        plus,
        minus,
        log_pointer_overlap,
    })
}

/// Reduced density matrix of the micro-system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoByTwoDensity {
    pub rho_uu: f64,
    pub rho_dd: f64,
    pub rho_ud: Complex64,
    /// `ln|ρ_ud|`, finite even when `ρ_ud` underflows.
    pub log_abs_rho_ud: f64,
}

impl TwoByTwoDensity {
    pub fn is_positive(&self) -> bool {
        self.rho_ud.norm_sqr() <= self.rho_uu * self.rho_dd + 1e-12
    }

    fn diagonal_part(&self) -> TwoByTwoDensity {
        TwoByTwoDensity {
            rho_ud: Complex64::new(0.0, 0.0),
            log_abs_rho_ud: f64::NEG_INFINITY,
            ..*self
        }
    }

    /// Probabilities of `|↑⟩, |↓⟩` after applying `u`.
    fn outcome_probabilities(&self, u: &[[Complex64; 2]; 2]) -> [f64; 2] {
        let rho = [
            [Complex64::new(self.rho_uu, 0.0), self.rho_ud],
            [self.rho_ud.conj(), Complex64::new(self.rho_dd, 0.0)],
        ];
        let mut p = [0.0; 2];
        for (k, pk) in p.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..2 {
                for j in 0..2 {
                    acc += u[k][i] * rho[i][j] * u[k][j].conj();
                }
            }
            *pk = acc.re;
        }
        p
    }
}

/// Traces out the pointer: `ρ_ud = α β̄ ⟨−|+⟩`.
pub fn reduce_to_micro(c: &Composite) -> TwoByTwoDensity {
    let (a, b) = (c.micro.alpha, c.micro.beta);
    let log_ab = if a.norm() == 0.0 || b.norm() == 0.0 {
        f64::NEG_INFINITY
    } else {
        a.norm().ln() + b.norm().ln()
    };
    let log_abs_rho_ud = log_ab + c.log_pointer_overlap.re;
    let phase = a.arg() - b.arg() + c.log_pointer_overlap.im;
    TwoByTwoDensity {
        rho_uu: a.norm_sqr(),
        rho_dd: b.norm_sqr(),
        rho_ud: Complex64::from_polar(log_abs_rho_ud.exp(), phase),
        log_abs_rho_ud,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioned {
    pub micro: MicroState,
    pub probability: f64,
    /// Largest change in any later micro-system prediction caused by
    /// discarding the other branch: `2|ρ_ud|`.
    pub prediction_bound: f64,
}

/// Keeps the branch selected by `outcome` and renormalizes it.
pub fn condition_on_outcome(c: &Composite, outcome: Outcome) -> Result<Conditioned> {
    let (amp, micro) = match outcome {
        Outcome::Plus => (c.micro.alpha, MicroState::real(1.0, 0.0)?),
        Outcome::Minus => (c.micro.beta, MicroState::real(0.0, 1.0)?),
    };
    if amp.norm() == 0.0 {
        return Err(Error::invalid("selected branch has zero amplitude"));
    }
    let phase = Complex64::from_polar(1.0, amp.arg());
    let micro = MicroState {
        alpha: micro.alpha * phase,
        beta: micro.beta * phase,
    };
    let rho = reduce_to_micro(c);
    Ok(Conditioned {
        micro,
        probability: amp.norm_sqr() / c.norm_sqr(),
        prediction_bound: 2.0 * rho.rho_ud.norm(),
    })
}

/// Total-variation gap between the measurement statistics of `u` applied to
/// the full reduced state and to the collapsed (branch-mixture) state.
pub fn prediction_gap(c: &Composite, u: &[[Complex64; 2]; 2]) -> f64 {
    let rho = reduce_to_micro(c);
    let p = rho.outcome_probabilities(u);
    let q = rho.diagonal_part().outcome_probabilities(u);
    0.5 * ((p[0] - q[0]).abs() + (p[1] - q[1]).abs())
}

/// Pairwise overlap statistics for a set of random bath states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistinctnessStats {
    pub n_states: usize,
    pub dim: usize,
    pub pairs: usize,
    /// `None` when there are no pairs.
    pub mean_sq_overlap: Option<f64>,
    pub max_sq_overlap: Option<f64>,
    /// Pairs whose overlap is 1 to within round-off.
    pub identical_pairs: usize,
}

/// Samples `n_states` random bath states of dimension `dim`.
pub fn ensemble_distinctness(n_states: usize, dim: usize, seed: u64) -> Result<DistinctnessStats> {
    let seeds: Vec<u64> = (0..n_states as u64).map(|k| derive_seed(seed, k)).collect();
    ensemble_distinctness_with_seeds(&seeds, dim)
}

/// As [`ensemble_distinctness`], one state per explicit seed.
pub fn ensemble_distinctness_with_seeds(seeds: &[u64], dim: usize) -> Result<DistinctnessStats> {
    if dim < seeds.len() || dim == 0 {
        return Err(Error::invalid("bath dimension must be at least the number of states"));
    }
    let states: Vec<_> = seeds
        .iter()
        .map(|&s| random_state(dim, &mut rng_from_seed(s)))
        .collect();
    let (mut sum, mut max, mut pairs, mut identical) = (0.0, 0.0f64, 0, 0);
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            let o = states[i].dotc(&states[j]).norm_sqr();
            sum += o;
            max = max.max(o);
            pairs += 1;
            if o > 1.0 - 1e-12 {
                identical += 1;
            }
        }
    }
    Ok(DistinctnessStats {
        n_states: seeds.len(),
        dim,
        pairs,
        mean_sq_overlap: (pairs > 0).then(|| sum / pairs as f64),
        max_sq_overlap: (pairs > 0).then_some(max),
        identical_pairs: identical,
    })
}

/// Two classically degenerate states coupled by a tunneling amplitude
/// `H = [[e0, Δ], [Δ, e0]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Doublet {
    /// Ascending.
    pub levels: [f64; 2],
    pub splitting: f64,
    /// Eigenvectors in the basis of the two classical states, ordered like `levels`.
    #[serde(skip)]
    pub eigenvectors: [[f64; 2]; 2],
}

pub fn tunneling_doublet(e0: f64, delta: f64) -> Result<Doublet> {
    if !(e0.is_finite() && delta.is_finite()) {
        return Err(Error::invalid("doublet parameters must be finite"));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if delta < 0.0 { -1.0 } else { 1.0 };
    Ok(Doublet {
        levels: [e0 - delta.abs(), e0 + delta.abs()],
        splitting: 2.0 * delta.abs(),
        eigenvectors: [[s, -sign * s], [s, sign * s]],
    })
}

/// One row of a pointer-distinguishability scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerScanRow {
    pub n: usize,
    pub epsilon: f64,
    pub abs_r_pointer: f64,
    pub abs_rho_ud: f64,
    pub log_abs_rho_ud: f64,
}

/// Measures `micro` with pointers whose collective parts are `plus`/`minus`
/// and whose internal parts are `n` clusters each distinguished by `ε`.
pub fn pointer_scan(
    micro: MicroState,
    collective_plus: &GaussianPacket,
    collective_minus: &GaussianPacket,
    ns: &[usize],
    epsilon: f64,
    seed: u64,
) -> Result<Vec<PointerScanRow>> {
    ns.iter()
        .map(|&n| {
            let (a, b) = branch_internal_states(n, epsilon, derive_seed(seed, n as u64))?;
            let ready = PointerState {
                collective: *collective_plus,
                internal: a.clone(),
                label: PointerLabel::Ready,
            };
            let plus = PointerState {
                collective: *collective_plus,
                internal: a,
                label: PointerLabel::Plus,
            };
            let minus = PointerState {
                collective: *collective_minus,
                internal: b,
                label: PointerLabel::Minus,
            };
            let c = entangle(micro, &ready, plus, minus)?;
            let rho = reduce_to_micro(&c);
            Ok(PointerScanRow {
                n,
                epsilon,
                abs_r_pointer: c.abs_pointer_overlap(),
                abs_rho_ud: rho.rho_ud.norm(),
                log_abs_rho_ud: rho.log_abs_rho_ud,
            })
        })
        .collect()
}

/// Writes `N,epsilon,abs_r_pointer,abs_rho_ud` rows.
pub fn write_scan_csv<W: Write>(rows: &[PointerScanRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "N,epsilon,abs_r_pointer,abs_rho_ud")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.n,
            fmt_f64(r.epsilon),
            fmt_f64(r.abs_r_pointer),
            fmt_f64(r.abs_rho_ud)
        )?;
    }
    Ok(())
}
