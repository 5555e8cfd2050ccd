//! Command-line front end: one subcommand per experiment, plus `run` (take
//! the experiment from the config) and `sweep`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use macrodec::experiment::{self, ExperimentConfig, ExperimentKind, SweepConfig};

#[derive(Parser)]
#[command(name = "macrodec", version, about = "Self-decoherence experiments for macroscopic bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config, or a previous run.json / sweep.json.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Parameter override `key=value`; repeatable, wins over the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Default output directory.
    #[arg(long, env = "MACRODEC_OUT", hide = true, default_value = experiment::DEFAULT_OUTPUT_DIR)]
    default_out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Overlap of N-cluster product states against N.
    OverlapScan(Common),
    /// Two-branch screen pattern, visibility and classical comparison.
    DoubleSlit(Common),
    /// Closed-form spin-cluster dephasing trace.
    BathSpin(Common),
    /// Random-matrix bath trace.
    BathGue(Common),
    /// Recurrence-time statistics versus bath dimension.
    RecurrenceScan(Common),
    /// Pointer entanglement and reduced density matrix.
    Measure(Common),
    /// Tunneling doublet levels.
    Doublet(Common),
    /// Experiment named by the config file.
    Run(Common),
    /// Cartesian parameter sweep (`[grid]` section or `--set grid.KEY=[..]`).
    Sweep {
        experiment: Option<String>,
        #[command(flatten)]
        common: Common,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn fail(e: macrodec::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common, sweep_jobs) = match cli.command {
        Command::OverlapScan(c) => (Some(ExperimentKind::OverlapScan), c, None),
        Command::DoubleSlit(c) => (Some(ExperimentKind::DoubleSlit), c, None),
        Command::BathSpin(c) => (Some(ExperimentKind::BathSpin), c, None),
        Command::BathGue(c) => (Some(ExperimentKind::BathGue), c, None),
        Command::RecurrenceScan(c) => (Some(ExperimentKind::RecurrenceScan), c, None),
        Command::Measure(c) => (Some(ExperimentKind::Measure), c, None),
        Command::Doublet(c) => (Some(ExperimentKind::Doublet), c, None),
        Command::Run(c) => (None, c, None),
        Command::Sweep { experiment, common, jobs } => {
            let kind = match experiment.map(|s| s.parse()).transpose() {
                Ok(k) => k,
                Err(e) => return fail(e),
            };
            (kind, common, Some(jobs))
        }
    };
    let raw = match experiment::build_config(
        common.config.as_deref(),
        kind,
        &common.set,
        common.seed,
        common.out,
        &common.default_out,
    ) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    match sweep_jobs {
        None => {
            if !raw.grid.is_empty() {
                return fail(macrodec::Error::InvalidArgument(
                    "grid axes need the `sweep` subcommand".into(),
                ));
            }
            let result = ExperimentConfig::resolve(&raw, &common.default_out).and_then(|c| experiment::run(&c));
            match result {
                Ok(rec) => {
                    for a in &rec.artifacts {
                        println!("{}", a);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Some(jobs) => {
            let result = SweepConfig::resolve(&raw, &common.default_out).and_then(|c| experiment::sweep(&c, jobs));
            match result {
                Ok(rec) => {
                    println!("{} cells, {} failed", rec.n_cells, rec.failures.len());
                    for f in &rec.failures {
                        eprintln!("cell {}: {}", f.cell, f.message);
                    }
                    ExitCode::from(rec.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
    }
}
