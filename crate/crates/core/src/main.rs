use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use spectral_bandits::cli::{execute, Command, Verb};
use spectral_bandits::harness::CostModel;
use spectral_bandits::policies::PolicyKind;

/// Cost-aware bandits on graph signals: graph generation, data ingestion,
/// experiment runs and CSV reports.
#[derive(Parser)]
#[command(name = "spectral-bandits", version, about)]
struct Args {
    #[command(subcommand)]
    verb: VerbArgs,
}

#[derive(Subcommand)]
enum VerbArgs {
    /// Write an edge-list file for the configured graph.
    GenGraph {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the graph seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cluster labeled points and write an edge list plus reward CSV.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the clustering seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the configured experiment and write trajectory/summary CSVs
    /// plus a verification report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of cheapucb,spectralucb,linucb.
        #[arg(long, value_delimiter = ',')]
        policies: Option<Vec<String>>,
        /// Overrides the number of runs.
        #[arg(long)]
        runs: Option<usize>,
        /// Ledger to charge: width or quadratic.
        #[arg(long)]
        cost_model: Option<String>,
    },
    /// Recompute the summary CSV from an existing trajectory CSV.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn to_command(args: VerbArgs) -> Result<Command, spectral_bandits::Error> {
    Ok(match args {
        VerbArgs::GenGraph { config, out, seed } => Command {
            verb: Verb::GenGraph,
            config: Some(config),
            out,
            seed,
            policies: None,
            runs: None,
            cost_model: None,
        },
        VerbArgs::Ingest { config, out, seed } => Command {
            verb: Verb::Ingest,
            config: Some(config),
            out,
            seed,
            policies: None,
            runs: None,
            cost_model: None,
        },
        VerbArgs::Run {
            config,
            out,
            seed,
            policies,
            runs,
            cost_model,
        } => Command {
            verb: Verb::Run,
            config: Some(config),
            out,
            seed,
            policies: policies
                .map(|names| {
                    names
                        .iter()
                        .map(|name| PolicyKind::from_str(name))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?,
            runs,
            cost_model: cost_model.as_deref().map(CostModel::from_str).transpose()?,
        },
        VerbArgs::Report { out } => Command {
            verb: Verb::Report,
            config: None,
            out,
            seed: None,
            policies: None,
            runs: None,
            cost_model: None,
        },
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match to_command(args.verb) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match execute(&command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
