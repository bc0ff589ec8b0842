use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ris_idd::sim::{load_config, run_to_files, Scheme};

/// Monte Carlo BER and sum-rate sweep over transmit power.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Args {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed (overrides run.master_seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Frames per power point (overrides run.frames_per_point).
    #[arg(long)]
    frames: Option<usize>,
    /// Comma-separated subset of mmse, ris, idd, ris_idd.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    /// CSV output path; the JSON sidecar goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Write the RIS optimiser trace CSV.
    #[arg(long)]
    diagnostics: bool,
}

fn run(args: Args) -> ris_idd::Result<()> {
    let mut cfg = load_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.run.master_seed = s;
    }
    if let Some(f) = args.frames {
        cfg.run.frames_per_point = f;
    }
    if let Some(s) = args.schemes {
        cfg.run.schemes = s;
    }
    if let Some(o) = args.out {
        cfg.run.output = o;
    }
    if args.workers.is_some() {
        cfg.run.workers = args.workers;
    }
    cfg.run.diagnostics |= args.diagnostics;

    let (outcome, paths) = run_to_files(&cfg)?;
    log::info!(
        "wrote {} rows to {} ({} failed points)",
        outcome.rows.len(),
        paths.csv.display(),
        outcome.failures.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
