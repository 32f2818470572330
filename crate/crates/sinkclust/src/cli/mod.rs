//! Subcommands of the `sinkclust` binary.

pub mod args;
mod bench;
mod cluster;
mod cscc;
mod eval;
mod gen_synth;
mod train;

use clap::{Parser, Subcommand};

use crate::error::Result;

pub use bench::BenchArgs;
pub use cluster::ClusterArgs;
pub use cscc::CsccArgs;
pub use eval::EvalArgs;
pub use gen_synth::GenSynthArgs;
pub use train::TrainArgs;

/// Sinkhorn K-Means centroid networks: clustering, few-shot evaluation and training.
///
/// Log verbosity follows the SINKCLUST_LOG environment variable (error, warn, info, debug).
#[derive(Debug, Parser)]
#[command(name = "sinkclust", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic attribute-grid dataset.
    GenSynth(GenSynthArgs),
    /// Cluster a dataset with Sinkhorn K-Means or Lloyd.
    Cluster(ClusterArgs),
    /// Evaluate few-shot tasks over seeded episodes.
    Eval(EvalArgs),
    /// Train an embedding with the prototype surrogate loss.
    Train(TrainArgs),
    /// Consistency ratio of an unsupervised and a supervised report.
    Cscc(CsccArgs),
    /// Time Sinkhorn K-Means against Lloyd per episode.
    Bench(BenchArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenSynth(a) => gen_synth::run(&a),
        Command::Cluster(a) => cluster::run(&a),
        Command::Eval(a) => eval::run(&a),
        Command::Train(a) => train::run(&a),
        Command::Cscc(a) => cscc::run(&a),
        Command::Bench(a) => bench::run(&a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
