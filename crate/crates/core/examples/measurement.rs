//! A von Neumann measurement with a macroscopic pointer: the micro-system's
//! coherence is multiplied by the pointer overlap and vanishes like (1 − ε)^N.

use macrodec::measurement::{condition_on_outcome, ensemble_distinctness, pointer_scan, MicroState, Outcome};
use macrodec::states::GaussianPacket;

fn main() -> macrodec::Result<()> {
    let micro = MicroState::real(0.6, 0.8)?;
    let collective = GaussianPacket::new(0.0, 1.0, 0.0)?;
    let rows = pointer_scan(micro, &collective, &collective, &[1, 10, 100, 1000, 10_000], 0.05, 1)?;
    println!("{:>6} {:>14} {:>14}", "N", "|⟨−|+⟩|", "|ρ_ud|");
    for r in &rows {
        println!("{:>6} {:>14.4e} {:>14.4e}", r.n, r.abs_r_pointer, r.abs_rho_ud);
    }
    let comp = {
        use macrodec::double_slit::branch_internal_states;
        use macrodec::measurement::{entangle, PointerLabel, PointerState};
        let (a, b) = branch_internal_states(20, 0.05, 2)?;
        let plus = PointerState { collective, internal: a, label: PointerLabel::Plus };
        let minus = PointerState { collective, internal: b, label: PointerLabel::Minus };
        let ready = PointerState { label: PointerLabel::Ready, ..plus.clone() };
        entangle(micro, &ready, plus, minus)?
    };
    let c = condition_on_outcome(&comp, Outcome::Minus)?;
    println!(
        "condition on `minus`: P = {:.4}; later predictions change by at most {:.3e}",
        c.probability, c.prediction_bound
    );
    let s = ensemble_distinctness(50, 1 << 10, 3)?;
    println!(
        "50 random ready states in dim 1024: mean |overlap|² = {:.3e} (1/dim = {:.3e})",
        s.mean_sq_overlap.unwrap(),
        1.0 / 1024.0
    );
    Ok(())
}
