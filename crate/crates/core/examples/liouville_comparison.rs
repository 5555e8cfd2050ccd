//! Classical phase-space transport of the Gaussian matched to a quantum
//! packet: exact affine flow versus a sampled leapfrog ensemble.

use macrodec::dynamics::{evolve_gaussian_for, EvolutionParams, PotentialSpec};
use macrodec::liouville::{
    classical_density, ensemble_evolve, liouville_evolve, match_marginals, Bins, ClassicalSource,
    PhaseSpaceEnsemble,
};
use macrodec::states::GaussianPacket;

fn main() -> macrodec::Result<()> {
    let g = GaussianPacket::new(-1.0, 0.7, 1.5)?;
    let pot = PotentialSpec::harmonic(0.8);
    let (t, m) = (3.0, 1.0);
    let d0 = match_marginals(&g);
    let exact = liouville_evolve(&d0, &pot, t, m)?;
    let quantum = evolve_gaussian_for(&g, t, m, &pot)?;
    println!(
        "quantum ⟨x⟩ = {:.8}, σ = {:.8}; classical ⟨x⟩ = {:.8}, σ = {:.8}",
        quantum.center,
        quantum.sigma,
        exact.mean_x,
        exact.xx.sqrt()
    );
    let ens = PhaseSpaceEnsemble::sample(&d0, 100_000, 11)?;
    let evolved = ensemble_evolve(&ens, &pot, &EvolutionParams::over(t, 1e-3, m)?)?;
    let bins = Bins::new(-6.0, 0.05, 241)?;
    let sampled = classical_density(ClassicalSource::Ensemble(&evolved), &bins)?;
    let analytic = classical_density(ClassicalSource::Gaussian(&exact), &bins)?;
    let l1: f64 = sampled.iter().zip(&analytic).map(|(a, b)| (a - b).abs()).sum::<f64>() * bins.dx;
    println!("L1 distance sampled vs exact classical density: {l1:.2e}");
    Ok(())
}
