//! The `(1 − ε)^N` law: overlap of two N-cluster product states whose
//! clusters are each slightly perturbed, computed in log space.

use macrodec::states::{
    effective_epsilon, perturb_cluster, product_overlap, sector_log_overlap, ClusterState, PerturbationSpec,
    ProductState,
};

fn main() -> macrodec::Result<()> {
    let reference = ClusterState::oscillator(0, 1.0)?;
    let push = PerturbationSpec::linear(0.45);
    let pushed = perturb_cluster(&reference, &push)?;
    let eps = effective_epsilon(&reference, &push)?;
    println!("per-cluster deficit ε = {eps:.6}");
    println!("{:>10} {:>16} {:>16} {:>12}", "N", "ln|⟨A|B⟩|", "N ln(1−ε)", "|⟨A|B⟩|");
    for n in [1, 10, 100, 1_000, 100_000, 1_000_000] {
        let a = ProductState::uniform(&reference, n)?;
        let b = ProductState::uniform(&pushed, n)?;
        let ov = product_overlap(&a, &b)?;
        println!(
            "{n:>10} {:>16.6} {:>16.6} {:>12.3e}",
            ov.log_magnitude,
            sector_log_overlap(n as f64, eps)?,
            ov.magnitude()
        );
    }
    Ok(())
}
