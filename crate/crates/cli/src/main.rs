use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covthresh::{commands, CliError, Config};

#[derive(Parser)]
#[command(name = "covthresh", version, about = "Sparse PCA by covariance thresholding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines under `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed of the section the subcommand reads.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; changes speed only, never results.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a dataset from [model] and write it with a truth sidecar.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Output dataset; `.bin` selects the binary format, anything else CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the [run] methods and print one JSON record per method.
    Run {
        #[command(flatten)]
        common: Common,
        /// Dataset to analyse; sampled from [model] when absent.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Phase-transition sweep over the [sweep] grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Output CSV table.
        #[arg(long)]
        out: PathBuf,
        /// Optional SVG plot of success rate against k/√n.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Haar-domain reconstruction demo from [wavelet].
    DemoWavelet {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(common: &Common, seed_section: &'static str) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.set(seed_section, "seed", seed.to_string());
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Generate { common, out } => commands::generate(&load(&common, "model")?, &out),
        Command::Run { common, data } => {
            let cfg = load(&common, "model")?;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let status = commands::run(&cfg, data.as_deref(), &mut lock)?;
            lock.flush().map_err(|e| CliError::write(Path::new("standard output"), e))?;
            Ok(status)
        }
        Command::Sweep { common, out, svg } => {
            commands::sweep(&load(&common, "sweep")?, &out, svg.as_deref(), common.threads)
        }
        Command::DemoWavelet { common, out } => commands::demo_wavelet(&load(&common, "wavelet")?, &out),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
