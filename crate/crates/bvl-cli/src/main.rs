//! `bvl`: command-line front end of the experiment driver.

use bvl_cli::{execute, CliError, Experiment};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Semiclassical Bohr-van Leeuwen experiments.
#[derive(Parser)]
#[command(name = "bvl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs whichever experiment the config names.
    Run(Flags),
    /// Semiclassical susceptibility at fixed density over an hbar grid.
    LimitStudy(Flags),
    /// Free-gas susceptibility from Landau-level sums.
    LandauCheck(Flags),
    /// Canonical versus grand-canonical quantities on finite boxes.
    BoxEquivalence(Flags),
    /// Classical gas partition function and magnetization.
    ClassicalBvl(Flags),
    /// Cutoff families, kernels, Green functions and contour checks.
    GeometryVerify(Flags),
    /// Fermi-Dirac function by quadrature and by series.
    FermiTable(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the configured seed.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Worker threads for the numerical kernels.
    #[arg(long)]
    threads: Option<usize>,
    /// Progress messages on stderr.
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (flags, expected) = match cli.command {
        Command::Run(f) => (f, None),
        Command::LimitStudy(f) => (f, Some(Experiment::LimitStudy)),
        Command::LandauCheck(f) => (f, Some(Experiment::LandauCheck)),
        Command::BoxEquivalence(f) => (f, Some(Experiment::BoxEquivalence)),
        Command::ClassicalBvl(f) => (f, Some(Experiment::ClassicalBvl)),
        Command::GeometryVerify(f) => (f, Some(Experiment::GeometryVerify)),
        Command::FermiTable(f) => (f, Some(Experiment::FermiTable)),
    };
    if let Some(n) = flags.threads {
        if n == 0 {
            return fail(CliError::Config(vec!["--threads must be at least 1".into()]));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(CliError::Config(vec![format!("--threads: {e}")]));
        }
    }
    match execute(&flags.config, flags.out.as_deref(), flags.seed_override, expected, flags.verbose) {
        Ok((table, files)) => {
            println!("{} rows -> {}", table.rows.len(), files.csv.display());
            if let Some(r) = files.report {
                println!("report -> {}", r.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
