//! The coherent regime: two degenerate classical states joined by tunneling
//! split into symmetric and antisymmetric levels.

use macrodec::measurement::tunneling_doublet;

fn main() -> macrodec::Result<()> {
    for (e0, delta) in [(0.0, 0.5), (2.0, 0.5), (0.0, 1e-3), (0.0, 0.0)] {
        let d = tunneling_doublet(e0, delta)?;
        println!(
            "e0 = {e0}, Δ = {delta}: levels {:?}, splitting {}, lower state {:?}",
            d.levels, d.splitting, d.eigenvectors[0]
        );
    }
    Ok(())
}
