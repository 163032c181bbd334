use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hetnet::config::NetworkConfig;
use hetnet::harness::{run_experiment, ExperimentSpec};
use hetnet::io::{emit_results, write_results, Format};
use hetnet::Error;

/// Run a HetNet coordination experiment and write its curve table.
#[derive(Debug, Parser)]
#[command(name = "hetnet", version)]
struct Args {
    /// Flat `key: value` config document; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// rate_vs_snr | sinr_vs_density | rate_vs_density | edge_multi_macro
    #[arg(long)]
    scenario: Option<String>,
    /// Comma-separated strategies: no_coord, full_coord, macro_only, no_inter_tier
    #[arg(long)]
    strategy: Option<String>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Comma-separated microcell counts.
    #[arg(long)]
    microcells: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: Args) -> Result<(), Error> {
    let mut cfg = match &args.config {
        Some(path) => NetworkConfig::load(path)?,
        None => NetworkConfig::default(),
    };
    let overrides = [
        ("scenario", &args.scenario),
        ("strategies", &args.strategy),
        ("snr_db", &args.snr),
        ("microcell_counts", &args.microcells),
        ("rho", &args.rho),
        ("trials", &args.trials),
        ("seed", &args.seed),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    let format: Format = args
        .format
        .parse()
        .map_err(|reason: String| Error::Config {
            key: "format".into(),
            reason,
        })?;

    let spec = ExperimentSpec::from_config(&cfg)?;
    let table = run_experiment(&spec)?;
    match &args.out {
        Some(path) => write_results(&table, format, path),
        None => emit_results(&table, format, std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hetnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
