use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};
use spwt::studies::{
    convergence_table, flops_table, run_convergence, run_design, run_flops, run_surface, run_sweep,
    surface_table, sweep_table,
};
use spwt::table::Table;
use spwt::{CliError, ExperimentConfig};

/// Hybrid-beamforming secure precise wireless transmission experiments.
#[derive(Debug, Parser)]
#[command(name = "spwt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed (overrides `seeds.master`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Design all three schemes at the `[budget]` operating point.
    Design,
    /// SINR over an angle/range grid for the hybrid design.
    Surface,
    /// Secrecy rate versus SNR for every scheme and allocation factor.
    SweepSnr,
    /// SLNR per outer iteration from random and warm starts.
    Convergence,
    /// FLOP counts versus array size.
    Flops,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seeds.master = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    let params = cfg.array.params();
    let bandwidth = params.n_subcarriers as f64 * params.subcarrier_spacing_hz;
    if bandwidth > params.carrier_hz / 100.0 {
        warn!(
            "bandwidth {bandwidth:.3e} Hz exceeds 1% of the carrier; the narrowband steering model is approximate"
        );
    }

    let tables: Vec<Table> = match cli.command {
        Command::Design => {
            let study = run_design(&cfg)?;
            for (setup, outcomes) in &study.trials {
                for o in outcomes {
                    info!(
                        "trial {} {}: SR = {:.4} bit/s/Hz, SINR_B = {:.2} dB, SINR_E = {:.2} dB",
                        setup.trial,
                        o.scheme(),
                        o.secrecy_rate,
                        10.0 * o.sinr_bob.log10(),
                        10.0 * o.sinr_eve.log10()
                    );
                }
            }
            vec![study.summary_table(), study.vectors_table()]
        }
        Command::Surface => vec![surface_table(&run_surface(&cfg)?)],
        Command::SweepSnr => vec![sweep_table(&run_sweep(&cfg)?)],
        Command::Convergence => {
            let (budget, records) = run_convergence(&cfg)?;
            vec![convergence_table(&budget, &records)]
        }
        Command::Flops => vec![flops_table(&run_flops(&cfg))],
    };

    tables
        .iter()
        .map(|t| t.write(&cfg.output.dir, &cfg.output.tag))
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.quiet {
        "error"
    } else {
        "info"
    }))
    .format_timestamp(None)
    .init();

    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                info!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
