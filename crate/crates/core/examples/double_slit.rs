//! Two-slit interference of a body with N internal clusters: visibility
//! tracks |r| = (1 − ε)^N and, once r ≈ 0, the screen is indistinguishable
//! from classical Liouville transport.

use macrodec::double_slit::{compare_with_classical, make_branches, which_slit_ambiguity_time, SlitGeometry};

fn main() -> macrodec::Result<()> {
    let geom = SlitGeometry::new(4.0, 0.5, 1.0)?;
    let t = geom.resolved_screen_time();
    println!(
        "L = {}, w = {}, ambiguity time 2MLw = {}, screen at t = {t}",
        geom.separation,
        geom.width,
        which_slit_ambiguity_time(&geom)
    );
    println!("{:>5} {:>12} {:>12} {:>12}", "N", "|r|", "visibility", "TV(q, cl)");
    for n in [0, 1, 5, 10, 20, 40, 100, 300] {
        let b = make_branches(&geom, n, 0.05, 7)?;
        let c = compare_with_classical(&b, &geom, t)?;
        println!("{n:>5} {:>12.4e} {:>12.4e} {:>12.4e}", b.abs_r(), c.pattern.visibility, c.tv_distance);
    }
    Ok(())
}
