use std::path::PathBuf;

use clap::{Args, ValueEnum};
use migtopo_core::{Topology, TopologyKind};
use serde::{Deserialize, Serialize};

use crate::commands::emit;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopoFormat {
    Dot,
    Json,
}

#[derive(Debug, Args)]
pub struct TopoArgs {
    /// Topology kind, e.g. ring, hypercube, ba.
    #[arg(long)]
    pub kind: String,
    /// Number of nodes.
    #[arg(long)]
    pub n: usize,
    /// Seed for Barabasi-Albert graphs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<TopoFormat>,
}

/// Adjacency export used by `topo gen --format json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub kind: TopologyKind,
    pub n: usize,
    pub seed: Option<u64>,
    pub directed: bool,
    /// Directed arcs; symmetric kinds list both directions.
    pub arcs: Vec<(usize, usize)>,
}

fn build(args: &TopoArgs) -> Result<Topology, CliError> {
    let kind: TopologyKind = args
        .kind
        .parse()
        .map_err(|e| CliError::Validation(format!("--kind: {e}")))?;
    Topology::build(kind, args.n, args.seed).map_err(|e| CliError::Validation(e.to_string()))
}

pub fn gen(args: &TopoArgs) -> Result<(), CliError> {
    let t = build(args)?;
    let text = match args.format.unwrap_or(TopoFormat::Dot) {
        TopoFormat::Dot => t.to_dot(),
        TopoFormat::Json => {
            let g = GraphJson {
                kind: t.kind(),
                n: t.n_nodes(),
                seed: t.seed(),
                directed: !t.is_symmetric(),
                arcs: t.arcs().collect(),
            };
            serde_json::to_string_pretty(&g).map_err(CliError::runtime)? + "\n"
        }
    };
    emit(args.out.as_deref(), &text)
}

pub fn metrics(args: &TopoArgs) -> Result<(), CliError> {
    if args.format == Some(TopoFormat::Dot) {
        return Err(CliError::Validation("metrics are only available as json".into()));
    }
    let m = build(args)?.metrics();
    let text = serde_json::to_string_pretty(&m).map_err(CliError::runtime)? + "\n";
    emit(args.out.as_deref(), &text)
}
