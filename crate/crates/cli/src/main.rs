//! `fpplab`: experiments and oracles for first-passage percolation on the
//! complete graph with exponential edge weights.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
//! 3 resource guard tripped.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fpplab_core::Error;

#[derive(Parser, Debug)]
#[command(name = "fpplab", version, about = "First-passage percolation on K_n: simulations and bound checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Constants,
    Simulate,
    Hops,
    VerifySptTail,
    VerifyRrtHeight,
    VerifyMaxTail,
    CountPairs,
    LightPaths,
    LightestGivenLight,
    Predicates,
    KeyLemma,
    Coupling,
    OrderStats,
    EstimateAlpha,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Constants => "constants",
            Kind::Simulate => "simulate",
            Kind::Hops => "hops",
            Kind::VerifySptTail => "verify-spt-tail",
            Kind::VerifyRrtHeight => "verify-rrt-height",
            Kind::VerifyMaxTail => "verify-max-tail",
            Kind::CountPairs => "count-pairs",
            Kind::LightPaths => "light-paths",
            Kind::LightestGivenLight => "lightest-given-light",
            Kind::Predicates => "predicates",
            Kind::KeyLemma => "key-lemma",
            Kind::Coupling => "coupling",
            Kind::OrderStats => "order-stats",
            Kind::EstimateAlpha => "estimate-alpha",
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Number of vertices (tree size `m` for verify-rrt-height).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated list of sizes.
    #[arg(long = "n-grid", value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    /// Path length in edges.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Legality / bonsai constant.
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Target illegality fraction for calibrating C.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed, decimal or 0x-hex.
    #[arg(long)]
    pub seed: Option<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file (CSV, or JSON for `constants`); a summary goes to `<out>.summary.json`.
    #[arg(long)]
    pub out: Option<String>,
    /// JSON config file; flags take precedence.
    #[arg(long)]
    pub config: Option<String>,
    /// Use (1-eps) ln n instead of the path weight in the bonsai allowance.
    #[arg(long = "bonsai-eps-variant")]
    pub bonsai_eps_variant: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the constants table and the eps family.
    Constants(Flags),
    /// Single-source statistics from vertex 1.
    Simulate(Flags),
    /// All-pairs hop counts and weights.
    Hops(Flags),
    /// Tail of the shortest path tree size.
    VerifySptTail(Flags),
    /// Height tail of random recursive trees.
    VerifyRrtHeight(Flags),
    /// Tail of the longest all-pairs hop count.
    VerifyMaxTail(Flags),
    /// Exhaustive intersecting path-pair counts against their bounds.
    CountPairs(Flags),
    /// Light path counts against the exact expectation.
    LightPaths(Flags),
    /// Planted light paths that fail to be shortest.
    LightestGivenLight(Flags),
    /// Legality and bonsai status of planted light paths.
    Predicates(Flags),
    /// Exhaustive local-optimality check on small graphs.
    KeyLemma(Flags),
    /// Exponential/uniform coupling discrepancy.
    Coupling(Flags),
    /// Normalized exponential partial sums against uniform order statistics.
    OrderStats(Flags),
    /// Growth rate of the longest hop count in ln n.
    EstimateAlpha(Flags),
}

impl Command {
    fn split(self) -> (Kind, Flags) {
        match self {
            Command::Constants(f) => (Kind::Constants, f),
            Command::Simulate(f) => (Kind::Simulate, f),
            Command::Hops(f) => (Kind::Hops, f),
            Command::VerifySptTail(f) => (Kind::VerifySptTail, f),
            Command::VerifyRrtHeight(f) => (Kind::VerifyRrtHeight, f),
            Command::VerifyMaxTail(f) => (Kind::VerifyMaxTail, f),
            Command::CountPairs(f) => (Kind::CountPairs, f),
            Command::LightPaths(f) => (Kind::LightPaths, f),
            Command::LightestGivenLight(f) => (Kind::LightestGivenLight, f),
            Command::Predicates(f) => (Kind::Predicates, f),
            Command::KeyLemma(f) => (Kind::KeyLemma, f),
            Command::Coupling(f) => (Kind::Coupling, f),
            Command::OrderStats(f) => (Kind::OrderStats, f),
            Command::EstimateAlpha(f) => (Kind::EstimateAlpha, f),
        }
    }
}

/// Failures that map to an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Guard(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceGuard(_) | Error::EnumerationLimit(_) => Failure::Guard(e.to_string()),
            Error::InvalidConfig(_) | Error::Domain { .. } | Error::InvalidEdge(..) => Failure::Usage(e.to_string()),
            Error::NoConvergence(_) => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (kind, flags) = cli.command.split();
    match commands::run(kind, &flags) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: check failed", kind.name());
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Guard(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
