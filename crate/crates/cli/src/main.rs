//! `locsym`: spectra, eigenstate maps, center-coupling sweeps, weak-coupling
//! series, and reflection-domain detection for 1D tight-binding chains.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "locsym",
    version,
    about = "Tight-binding chains with local reflection symmetry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Chain configuration file (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and eigenvectors (spectrum.csv, eigvecs.csv)
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Eigenstate map (map.csv, map.pgm)
    Map {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Center-coupling sweep with pair tracking (sweep.csv, fits.csv)
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Domain as start,end (auto-detected when omitted)
        #[arg(long)]
        domain: Option<String>,
        /// Center-coupling grid as start:stop:count, both ends included
        #[arg(long, default_value = "0:0.5:101")]
        grid: String,
    },
    /// Weak-coupling series and exact cross-check (series.csv,
    /// components_series.csv, check.csv)
    Perturb {
        #[command(flatten)]
        common: CommonArgs,
        /// Coupling for the cross-check (defaults to the config's scalar
        /// coupling)
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Reflection-domain detection and localization report (domains.csv,
    /// localization.csv)
    Detect {
        #[command(flatten)]
        common: CommonArgs,
        /// Smallest domain size to report (even)
        #[arg(long, default_value_t = 2)]
        min_size: usize,
        /// On-site comparison tolerance
        #[arg(long, default_value_t = locsym_core::chain::DETECT_TOL)]
        tol: f64,
        /// Report every palindromic range, not only maximal ones
        #[arg(long)]
        all: bool,
        /// Localization threshold in (0.5, 1]
        #[arg(long, default_value_t = 0.75)]
        theta: f64,
    },
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("LOCSYM_THREADS") {
        match raw.parse::<usize>() {
            Ok(k) if k >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
            _ => eprintln!("ignoring invalid LOCSYM_THREADS={raw}"),
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Spectrum { common } => commands::cmd_spectrum(&common.config, &common.out),
        Command::Map { common } => commands::cmd_map(&common.config, &common.out),
        Command::Sweep {
            common,
            domain,
            grid,
        } => commands::cmd_sweep(&common.config, &common.out, domain.as_deref(), grid),
        Command::Perturb { common, eps } => {
            commands::cmd_perturb(&common.config, &common.out, *eps)
        }
        Command::Detect {
            common,
            min_size,
            tol,
            all,
            theta,
        } => commands::cmd_detect(&common.config, &common.out, *min_size, *tol, *all, *theta),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("locsym: {}", err.message);
            ExitCode::from(err.code as u8)
        }
    }
}
