//! Flipping all N spins needs the N-th order of the time expansion: the exact
//! amplitude falls by ≈ ln(g t) per added spin.

use macrodec::bath::linking::sector_linking_amplitude;

fn main() -> macrodec::Result<()> {
    let (g, t) = (0.1, 1.0);
    println!("{:>3} {:>14} {:>14} {:>10}", "N", "ln|amp| exact", "N ln(g t)", "step");
    let mut prev = None;
    for n in 1..=12 {
        let s = sector_linking_amplitude(n, g, t)?;
        let step = prev.map_or(f64::NAN, |p: f64| s.log_amplitude - p);
        println!("{n:>3} {:>14.6} {:>14.6} {step:>10.4}", s.log_amplitude, s.perturbative_log_estimate);
        prev = Some(s.log_amplitude);
    }
    Ok(())
}
