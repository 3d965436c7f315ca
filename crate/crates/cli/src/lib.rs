//! Command-line harness: configs, result files, analysis and plot data.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use commands::analyze::{BestWorstArgs, FeaturesArgs, PreorderArgs, TauArgs};
use commands::plot::PlotArgs;
use commands::run::RunArgs;
use commands::topo::TopoArgs;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "migtopo", version, about = "Island-model migration topology experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate topologies or report their metrics.
    #[command(subcommand)]
    Topo(TopoCommand),
    /// Run every setup of an experiment config.
    Run(RunArgs),
    /// Rank topologies and compare rankings.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Per-period mean and deviation of the global best, as CSV.
    Plot(PlotArgs),
}

#[derive(Debug, Subcommand)]
pub enum TopoCommand {
    Gen(TopoArgs),
    Metrics(TopoArgs),
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Significance preorder over the topologies of each group.
    Preorder(PreorderArgs),
    /// Kendall tau-b between preorders.
    Tau(TauArgs),
    /// Topologies beating, or beaten by, the most others.
    Bestworst(BestWorstArgs),
    /// Correlation between graph-metric rankings and a preorder.
    Features(FeaturesArgs),
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Topo(TopoCommand::Gen(a)) => commands::topo::gen(a),
        Command::Topo(TopoCommand::Metrics(a)) => commands::topo::metrics(a),
        Command::Run(a) => commands::run::run(a).map(drop),
        Command::Analyze(AnalyzeCommand::Preorder(a)) => commands::analyze::preorder(a).map(drop),
        Command::Analyze(AnalyzeCommand::Tau(a)) => commands::analyze::tau(a),
        Command::Analyze(AnalyzeCommand::Bestworst(a)) => commands::analyze::bestworst(a).map(drop),
        Command::Analyze(AnalyzeCommand::Features(a)) => commands::analyze::features(a).map(drop),
        Command::Plot(a) => commands::plot::plot(a).map(drop),
    }
}

/// Parses `args` and runs the command, returning the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
