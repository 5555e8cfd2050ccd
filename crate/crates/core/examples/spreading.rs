//! Wave-packet spreading of a collective coordinate: closed form versus the
//! split-step grid propagator, and the √(t/M) law for heavy bodies.

use macrodec::dynamics::{
    evolve_gaussian_for, minimal_spread_width, packet_width, split_step_evolve, EvolutionParams, PotentialSpec,
};
use macrodec::states::GaussianPacket;

fn main() -> macrodec::Result<()> {
    let t = 10.0f64;
    println!("{:>10} {:>14} {:>14} {:>14} {:>10}", "M", "σ(t) grid", "σ(t) exact", "√(t/M)", "|Δ|");
    for m in [1.0, 1e2, 1e4, 1e6] {
        // The initial width that minimizes σ(t).
        let s0 = (t / (2.0 * m)).sqrt();
        let g = GaussianPacket::new(0.0, s0, 0.0)?;
        let dx = s0 / 16.0;
        let psi = g.to_grid(-2048.0 * dx, dx, 4096)?;
        let out = split_step_evolve(&psi, &EvolutionParams::new(t / 10.0, 10, m)?, &PotentialSpec::Free)?;
        let exact = evolve_gaussian_for(&g, t, m, &PotentialSpec::Free)?.sigma;
        let w = packet_width(&out);
        println!(
            "{m:>10.0e} {w:>14.8} {exact:>14.8} {:>14.8} {:>10.1e}",
            minimal_spread_width(t, m),
            (w - exact).abs()
        );
    }
    Ok(())
}
