//! Command-line front end: parses flags, hands everything to the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rpcc::cli::{run, Command, Invocation};

#[derive(Parser)]
#[command(
    name = "rpcc",
    version,
    about = "Convex clustering, random projection, and recovery-bound experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output root directory (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Name of the output subdirectory (defaults to a config-hash tag).
    #[arg(long)]
    tag: Option<String>,
    /// Validate the config and exit without computing.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a dataset and write it as CSV.
    Gen(Common),
    /// Build a fusion-weight graph and check the weight condition.
    Weights(Common),
    /// Sample a projection matrix and embed the data.
    Project(Common),
    /// Solve one clustering instance at a fixed gamma.
    Solve(Common),
    /// Sweep a gamma grid and score the clustering path.
    Path(Common),
    /// Compute recovery bounds, thresholds, and intervals as JSON.
    Bounds(Common),
    /// Measure squared-norm preservation rates over many projections.
    VerifyJl(Common),
    /// K-means baseline, optionally on randomly projected data.
    Kmeans(Common),
    /// Projected convex clustering vs projected K-means on shared projections.
    Compare(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Gen(c) => (Command::Gen, c),
        Cmd::Weights(c) => (Command::Weights, c),
        Cmd::Project(c) => (Command::Project, c),
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Path(c) => (Command::Path, c),
        Cmd::Bounds(c) => (Command::Bounds, c),
        Cmd::VerifyJl(c) => (Command::VerifyJl, c),
        Cmd::Kmeans(c) => (Command::Kmeans, c),
        Cmd::Compare(c) => (Command::Compare, c),
    };
    let code = run(&Invocation {
        command,
        config_path: common.config,
        out: common.out,
        seed: common.seed,
        tag: common.tag,
        dry_run: common.dry_run,
    });
    ExitCode::from(code as u8)
}
