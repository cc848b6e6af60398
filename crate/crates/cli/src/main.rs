//! `oppmod` command-line entry point.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(
    name = "oppmod",
    version,
    about = "Opponent-modeling auction and order-book experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterated first-price sealed-bid auction.
    #[command(subcommand)]
    SealedBid(SealedBidCommand),
    /// Agent-based limit order book simulation.
    #[command(subcommand)]
    Lob(LobCommand),
    /// Labeled state-action samples from simulator records.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Archetype classifier.
    #[command(subcommand)]
    Classify(ClassifyCommand),
    /// Principal components of the classifier's penultimate layer.
    #[command(subcommand)]
    Pca(PcaCommand),
}

#[derive(Debug, Subcommand)]
enum SealedBidCommand {
    Run {
        #[command(flatten)]
        common: Common,
        /// Worker threads for independent seeds.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Debug, Subcommand)]
enum LobCommand {
    Simulate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
enum DatasetCommand {
    Generate {
        /// Order record files written by `lob simulate`.
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 5000)]
        per_class: usize,
        /// Train, validation and test fractions.
        #[arg(long, default_value = "0.536,0.134,0.334", value_parser = parse_ratios)]
        ratios: [f64; 3],
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ClassifyCommand {
    Train {
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        val: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum PcaCommand {
    Project {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 3)]
        components: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, required_unless_present = "print_config")]
    out: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

fn parse_ratios(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [a, b, c] = parts[..] else {
        return Err(format!(
            "expected three comma-separated ratios, got {}",
            parts.len()
        ));
    };
    if [a, b, c].iter().any(|r| !(0.0..=1.0).contains(r)) || ((a + b + c) - 1.0).abs() > 0.01 {
        return Err(format!(
            "ratios {a}, {b}, {c} must lie in [0, 1] and sum to 1"
        ));
    }
    Ok([a, b, c])
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Auction(#[from] oppmod::auction::AuctionError),
    #[error(transparent)]
    Agent(#[from] oppmod::agents::AgentError),
    #[error(transparent)]
    Dataset(#[from] oppmod::dataset::DatasetError),
    #[error(transparent)]
    Classifier(#[from] oppmod::classifier::ClassifierError),
    #[error(transparent)]
    Numerics(#[from] oppmod::numerics::NumericsError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SealedBid(SealedBidCommand::Run { common, jobs }) => {
            commands::sealed_bid_run(&common, jobs)
        }
        Command::Lob(LobCommand::Simulate { common }) => commands::lob_simulate(&common),
        Command::Dataset(DatasetCommand::Generate {
            inputs,
            per_class,
            ratios,
            seed,
            out,
        }) => commands::dataset_generate(&inputs, per_class, ratios, seed, &out),
        Command::Classify(ClassifyCommand::Train { train, val, common }) => {
            commands::classify_train(train.as_deref(), val.as_deref(), &common)
        }
        Command::Classify(ClassifyCommand::Eval { model, data, out }) => {
            commands::classify_eval(&model, &data, &out)
        }
        Command::Pca(PcaCommand::Project {
            model,
            data,
            components,
            out,
        }) => commands::pca_project(&model, &data, components, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
