use std::path::PathBuf;

use clap::{Parser, Subcommand};

use liepoisson_cli::run::{self, RunOptions};

#[derive(Parser)]
#[command(
    name = "lpsim",
    version,
    about = "Simulate and verify Lie-Poisson systems: rigid bodies, rotors, heavy tops"
)]
struct Cli {
    /// Directory run artifacts are written to.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = liepoisson::verify::DEFAULT_SEED)]
    seed: u64,
    /// Suppress progress output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario file and write a CSV time series plus a summary.
    Simulate { scenario: PathBuf },
    /// Run the full structure-check suite and write its report.
    Verify,
    /// Check a feedback-equivalence scenario.
    Equivalence { scenario: PathBuf },
    /// Check a port scenario.
    Port { scenario: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    let opts = RunOptions {
        out_dir: &cli.out_dir,
        seed: cli.seed,
        quiet: cli.quiet,
    };
    let result = match &cli.command {
        Command::Simulate { scenario } => run::simulate(scenario, &opts),
        Command::Verify => run::verify(&opts),
        Command::Equivalence { scenario } => run::equivalence(scenario, &opts),
        Command::Port { scenario } => run::port(scenario, &opts),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
