mod commands;
mod config;
mod error;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::error::CliError;

/// Multifractal entropy spectra of measures on subshifts of finite type.
#[derive(Debug, Parser)]
#[command(name = "mfent", version)]
struct Args {
    command: Command,
    /// JSON config file, or inline JSON starting with `{`.
    #[arg(long)]
    config: String,
    /// Output directory (default: `out` from the config, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "MFENT_THREADS")]
    threads: Option<usize>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// h(q), its Legendre transform and the domain endpoints.
    Spectrum,
    /// Covering, packing and outer packing values for one (N, D).
    Premeasure,
    /// Bowen and packing entropies of the configured set.
    Entropy,
    /// Pressure identity residuals over the q grid.
    VerifyGibbs,
    Doubling,
    /// Local entropy bounds along sampled points.
    Local,
    /// Word-counting level sets and identity residuals.
    LevelSpectrum,
}

fn run(args: &Args) -> Result<(), CliError> {
    let mut config = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Output {
        path: out.display().to_string(),
        message: e.to_string(),
    })?;
    match args.command {
        Command::Spectrum => commands::spectrum(&config, &out),
        Command::Premeasure => commands::premeasure(&config, &out),
        Command::Entropy => commands::entropy(&config, &out),
        Command::VerifyGibbs => commands::verify_gibbs(&config, &out),
        Command::Doubling => commands::doubling(&config, &out),
        Command::Local => commands::local(&config, &out),
        Command::LevelSpectrum => commands::level_spectrum(&config, &out),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mfent: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
