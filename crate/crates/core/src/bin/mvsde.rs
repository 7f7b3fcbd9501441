use std::path::PathBuf;

use clap::{Parser, Subcommand};
use mvsde::cli::{self, Command};

#[derive(Parser)]
#[command(name = "mvsde", version, about = "Simulate and verify McKean-Vlasov SDEs with self-similar marginals")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate paths and write paths.tsv, qv.tsv and meta.json.
    Simulate(Io),
    /// Run the verification battery; exit 4 if any check fails.
    Verify(Io),
    /// Simulate and test each beta in `betas`; write sweep.tsv.
    Sweep(Io),
    /// Replica fluctuation experiment for the frozen particle system.
    Particles(Io),
}

#[derive(clap::Args)]
struct Io {
    /// Flat key = value config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let args = Args::parse();
    if let Err(e) = cli::configure_threads() {
        eprintln!("mvsde: {e}");
        std::process::exit(cli::exit_code(&e));
    }
    let (cmd, io) = match args.command {
        Cmd::Simulate(io) => (Command::Simulate, io),
        Cmd::Verify(io) => (Command::Verify, io),
        Cmd::Sweep(io) => (Command::Sweep, io),
        Cmd::Particles(io) => (Command::Particles, io),
    };
    std::process::exit(cli::run(cmd, &io.config, io.out.as_deref()));
}
