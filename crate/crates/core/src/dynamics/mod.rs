//! Collective-coordinate dynamics: closed-form Gaussian propagation,
//! split-step grid propagation, and the center-of-mass split.

pub mod com;
pub mod grid;
pub mod potential;
pub mod propagate;

pub use com::{split_com, ComSplit};
pub use grid::{packet_width, GridWavefunction};
pub use potential::{EvolutionParams, PotentialSpec};
pub use propagate::{
    analytic_gaussian_evolve, evolve_gaussian_for, relax_ground_state, split_step_evolve,
    split_step_evolve_with_diagnostics, Diagnostics, RelaxOptions, SplitStepPropagator,
};

/// Width at time `t` of a free packet prepared with the initial width that
/// minimizes it, `σ₀² = t/(2M)`: exactly `√(t/M)`.
pub fn minimal_spread_width(t: f64, mass: f64) -> f64 {
    (t / mass).sqrt()
}
