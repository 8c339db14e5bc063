mod commands;
mod error;
mod manifest;

use clap::{Parser, Subcommand};

use commands::*;
use error::CliError;
use manifest::Context;

#[derive(Parser, Debug)]
#[command(name = "holodimer", version, about = "Vertex models on the honeycomb torus via dimers on the Fisher graph")]
struct Cli {
    /// Worker threads for the parallel kernels
    #[arg(long, global = true, env = "HOLODIMER_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Realizability checks of the signatures in a model
    Check(CheckArgs),
    /// Holographic reduction to a Fisher-graph dimer model
    Reduce(ReduceArgs),
    /// Sector Pfaffians and partition function of a Fisher torus (CSV)
    Partition(PartitionArgs),
    /// Infinite-volume free energy of a 1x1-periodic Fisher torus
    FreeEnergy(FreeEnergyArgs),
    /// Infinite-volume probability of a local configuration
    LocalProb(LocalProbArgs),
    /// Probability of a local configuration on the n x n torus
    LocalProbFinite(LocalProbFiniteArgs),
    /// Glauber dynamics for the 1-2 model
    Sample(SampleArgs),
    /// Brute-force enumeration on the 1x1 or 2x2 torus
    Oracle(OracleArgs),
}

fn run(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let mut ctx = Context::new(argv);
    match &cli.command {
        Command::Check(a) => check(&mut ctx, a),
        Command::Reduce(a) => reduce(&mut ctx, a),
        Command::Partition(a) => partition(&mut ctx, a),
        Command::FreeEnergy(a) => free_energy_cmd(&mut ctx, a),
        Command::LocalProb(a) => local_prob(&mut ctx, a),
        Command::LocalProbFinite(a) => local_prob_finite(&mut ctx, a),
        Command::Sample(a) => sample_cmd(&mut ctx, a),
        Command::Oracle(a) => oracle(&mut ctx, a),
    }
}

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::try_parse_from(&argv).unwrap_or_else(|e| e.exit());
    if let Err(e) = run(cli, argv) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
