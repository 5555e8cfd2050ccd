//! Closed-form spin-cluster dephasing: Gaussian short-time decay with rate
//! ∝ N, and full recurrences only for commensurate detunings.

use std::f64::consts::PI;

use macrodec::bath::recurrence::find_recurrences;
use macrodec::bath::{spin_bath_trace, uniform_times, CouplingPattern, SpinBathSpec};

fn main() -> macrodec::Result<()> {
    let times = uniform_times(0.1, 101)?;
    for n in [10, 100, 1000] {
        let tr = spin_bath_trace(&SpinBathSpec::uniform(n, 1.0)?, &times)?;
        let r = tr.r_values.last().unwrap().norm();
        println!("N = {n:>5}: −ln|r(0.1)| = {:.6}  (Nt²/8 = {:.6})", -r.ln(), n as f64 * 0.01 / 8.0);
    }
    let long = uniform_times(60.0, 60_001)?;
    let uniform = find_recurrences(&spin_bath_trace(&SpinBathSpec::uniform(8, 1.0)?, &long)?, 0.9)?;
    println!(
        "uniform δ = 1: |r| back above 0.9 at t = {:?}, ahead of the full revival at 2π = {:.4}",
        uniform.first_recurrence_time,
        2.0 * PI
    );
    let random = SpinBathSpec::new(8, CouplingPattern::RandomUniform { min: 0.5, max: 1.5, seed: 4 })?;
    let rep = find_recurrences(&spin_bath_trace(&random, &long)?, 0.9)?;
    println!(
        "random δ ∈ [0.5, 1.5]: first recurrence {:?}, plateau {:.4}",
        rep.first_recurrence_time, rep.plateau_level
    );
    Ok(())
}
