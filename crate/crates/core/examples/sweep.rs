//! A seeded parameter sweep written to a directory: double-slit visibility
//! over N and ε with fitted slopes of ln V against N.

use macrodec::experiment::{sweep, ExperimentKind, ParamValue, RawConfig, SweepConfig};

fn main() -> macrodec::Result<()> {
    let out = std::env::temp_dir().join("macrodec-sweep-example");
    let mut raw = RawConfig {
        experiment: Some(ExperimentKind::DoubleSlit),
        seed: Some(1),
        output_dir: Some(out.clone()),
        ..RawConfig::default()
    };
    raw.grid.insert("N".into(), ParamValue::List((1..=20).map(ParamValue::Int).collect()));
    raw.grid.insert("epsilon".into(), ParamValue::List([0.02, 0.05, 0.1].map(ParamValue::Float).to_vec()));
    let cfg = SweepConfig::resolve(&raw, &out)?;
    let rec = sweep(&cfg, 0)?;
    println!("{} cells written to {}", rec.n_cells, out.display());
    for f in &rec.fits {
        println!("{:<50} slope {:.6}", f.name, f.slope);
    }
    Ok(())
}
