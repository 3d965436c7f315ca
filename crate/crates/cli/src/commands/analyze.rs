use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use migtopo_core::stats::{
    best_worst, build_preorder_basic, build_preorder_extended, feature_preorder, kendall_tau_b, preorder_height,
    validate_relation, Direction, Feature, Preorder, Sidedness, StatsError, TestOptions, ValidationReport,
};
use migtopo_core::{Topology, TopologyKind, TopologyMetrics};
use serde::{Deserialize, Serialize};

use crate::commands::emit;
use crate::error::CliError;
use crate::output::{load_results, write_json, LoadedSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Basic,
    Extended,
}

#[derive(Debug, Args)]
pub struct PreorderArgs {
    /// Setup directories or output roots.
    #[arg(long = "results", required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Method::Basic)]
    pub method: Method,
    /// Trailing fraction of periods the extended method may look back over.
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
    /// Use one-sided p-values.
    #[arg(long)]
    pub one_sided: bool,
    /// Output file; only valid when the results form a single group.
    #[arg(long, conflicts_with = "out_dir")]
    pub out: Option<PathBuf>,
    /// Directory receiving one report per group.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TauArgs {
    #[arg(long, requires = "b", conflicts_with = "inputs")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    /// Preorder files compared pairwise into a matrix.
    #[arg(long, num_args = 2..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BestWorstArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Node count used to compute graph metrics; taken from the report when
    /// omitted.
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for Barabasi-Albert labels that carry none.
    #[arg(long, default_value_t = 1)]
    pub ba_seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Where a preorder element came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub element: String,
    pub label: String,
    pub config_hash: String,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreorderReport {
    pub group: String,
    pub n_islands: usize,
    pub method: Method,
    pub alpha: f64,
    pub window: f64,
    pub sidedness: Sidedness,
    pub inputs: Vec<InputRef>,
    pub preorder: Preorder,
    pub validation: ValidationReport,
    pub valid: bool,
    /// Longest chain; absent for invalid relations.
    pub height: Option<usize>,
}

/// Groups setups by problem, algorithm and island count, keeping the order
/// in which they were listed.
fn group(setups: Vec<LoadedSetup>) -> Vec<(String, Vec<LoadedSetup>)> {
    let mut groups: Vec<(String, Vec<LoadedSetup>)> = Vec::new();
    for s in setups {
        match groups.iter_mut().find(|(g, _)| *g == s.record.group) {
            Some((_, v)) => v.push(s),
            None => groups.push((s.record.group.clone(), vec![s])),
        }
    }
    groups
}

fn stats_error(e: StatsError) -> CliError {
    CliError::Validation(e.to_string())
}

pub fn build_report(group_name: &str, setups: &[LoadedSetup], args: &PreorderArgs) -> Result<PreorderReport, CliError> {
    let opts = TestOptions {
        alpha: args.alpha,
        sidedness: if args.one_sided {
            Sidedness::OneSided
        } else {
            Sidedness::TwoSided
        },
    };
    let mut seen = std::collections::HashSet::new();
    for s in setups {
        if !seen.insert(&s.record.topology_label) {
            return Err(CliError::Validation(format!(
                "group {group_name} lists topology '{}' twice",
                s.record.topology_label
            )));
        }
    }
    let built = match args.method {
        Method::Basic => {
            let samples: Vec<(String, Vec<f64>)> = setups
                .iter()
                .map(|s| (s.record.topology_label.clone(), s.final_values()))
                .collect();
            build_preorder_basic(&samples, &opts)
        }
        Method::Extended => {
            let traces: Vec<(String, Vec<Vec<f64>>)> = setups
                .iter()
                .map(|s| (s.record.topology_label.clone(), s.curves()))
                .collect();
            build_preorder_extended(&traces, &opts, args.window)
        }
    };
    let (preorder, validation) = match built {
        Ok(p) => (p, ValidationReport::default()),
        Err(StatsError::RelationInvalid { preorder, report }) => (*preorder, report),
        Err(e) => return Err(stats_error(e)),
    };
    let valid = validation.is_valid();
    Ok(PreorderReport {
        group: group_name.to_string(),
        n_islands: setups[0].record.spec.n_islands,
        method: args.method,
        alpha: args.alpha,
        window: args.window,
        sidedness: opts.sidedness,
        inputs: setups
            .iter()
            .map(|s| InputRef {
                element: s.record.topology_label.clone(),
                label: s.record.label.clone(),
                config_hash: s.record.config_hash.clone(),
                master_seed: s.record.spec.master_seed,
            })
            .collect(),
        height: if valid { preorder_height(&preorder).ok() } else { None },
        preorder,
        validation,
        valid,
    })
}

pub fn preorder(args: &PreorderArgs) -> Result<Vec<PreorderReport>, CliError> {
    let groups = group(load_results(&args.results)?);
    if args.out.is_some() && groups.len() > 1 {
        return Err(CliError::Validation(format!(
            "results form {} groups; use --out-dir instead of --out",
            groups.len()
        )));
    }
    let reports = groups
        .iter()
        .map(|(g, setups)| build_report(g, setups, args))
        .collect::<Result<Vec<_>, _>>()?;

    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?;
        for r in &reports {
            write_json(&dir.join(format!("{}.json", r.group)), r).map_err(CliError::Runtime)?;
        }
    } else {
        let text = match reports.as_slice() {
            [one] => serde_json::to_string_pretty(one),
            many => serde_json::to_string_pretty(many),
        }
        .map_err(CliError::runtime)?;
        emit(args.out.as_deref(), &(text + "\n"))?;
    }

    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !r.valid)
        .map(|r| format!("{}: {}", r.group, r.validation))
        .collect();
    if bad.is_empty() {
        Ok(reports)
    } else {
        Err(CliError::InvalidRelation(format!("invalid relation in {}", bad.join("; "))))
    }
}

/// Reads a preorder report or a bare preorder.
pub fn load_preorder(path: &Path) -> Result<(String, Preorder, Option<usize>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(r) = serde_json::from_str::<PreorderReport>(&text) {
        return Ok((r.group, r.preorder, Some(r.n_islands)));
    }
    let p: Preorder =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    Ok((name, p, None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauPair {
    pub a: String,
    pub b: String,
    pub tau_b: f64,
    #[serde(rename = "C")]
    pub concordant: u64,
    #[serde(rename = "D")]
    pub discordant: u64,
    pub n0: u64,
    pub n1: u64,
    pub n2: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauMatrix {
    pub labels: Vec<String>,
    /// `null` where tau-b is undefined or the element sets differ.
    pub tau_b: Vec<Vec<Option<f64>>>,
}

pub fn tau(args: &TauArgs) -> Result<(), CliError> {
    let text = match (&args.a, &args.b) {
        (Some(a), Some(b)) => {
            let (na, pa, _) = load_preorder(a)?;
            let (nb, pb, _) = load_preorder(b)?;
            let k = kendall_tau_b(&pa, &pb).map_err(stats_error)?;
            serde_json::to_string_pretty(&TauPair {
                a: na,
                b: nb,
                tau_b: k.tau_b,
                concordant: k.concordant,
                discordant: k.discordant,
                n0: k.n0,
                n1: k.n1,
                n2: k.n2,
            })
        }
        _ => {
            if args.inputs.len() < 2 {
                return Err(CliError::Validation("give --a and --b, or at least two --inputs".into()));
            }
            let loaded = args
                .inputs
                .iter()
                .map(|p| load_preorder(p))
                .collect::<Result<Vec<_>, _>>()?;
            let tau_b = loaded
                .iter()
                .map(|(_, x, _)| {
                    loaded
                        .iter()
                        .map(|(_, y, _)| kendall_tau_b(x, y).ok().map(|k| k.tau_b))
                        .collect()
                })
                .collect();
            serde_json::to_string_pretty(&TauMatrix {
                labels: loaded.into_iter().map(|(n, _, _)| n).collect(),
                tau_b,
            })
        }
    }
    .map_err(CliError::runtime)?;
    emit(args.out.as_deref(), &(text + "\n"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestWorst {
    pub k: usize,
    pub best: Vec<String>,
    pub worst: Vec<String>,
}

pub fn bestworst(args: &BestWorstArgs) -> Result<BestWorst, CliError> {
    let (_, p, _) = load_preorder(&args.input)?;
    let (best, worst) = best_worst(&p, args.k);
    let out = BestWorst { k: args.k, best, worst };
    let text = serde_json::to_string_pretty(&out).map_err(CliError::runtime)? + "\n";
    emit(args.out.as_deref(), &text)?;
    let report = validate_relation(&p);
    if report.is_valid() {
        Ok(out)
    } else {
        Err(CliError::InvalidRelation(format!("{}: {report}", args.input.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub feature: Feature,
    /// Ascending: smaller metric values rank higher.
    pub direction: Direction,
    pub tau_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub group: String,
    pub n: usize,
    pub rows: Vec<FeatureRow>,
}

/// Maps a preorder element such as `ring` or `ba@2` to a graph.
fn element_topology(label: &str, n: usize, default_seed: u64) -> Result<Topology, CliError> {
    let (name, seed) = match label.split_once('@') {
        Some((name, seed)) => (
            name,
            Some(
                seed.parse::<u64>()
                    .map_err(|_| CliError::Validation(format!("bad seed in element '{label}'")))?,
            ),
        ),
        None => (label, None),
    };
    let kind: TopologyKind = name
        .parse()
        .map_err(|e| CliError::Validation(format!("element '{label}': {e}")))?;
    let seed = match kind {
        TopologyKind::BarabasiAlbert { .. } => seed.or(Some(default_seed)),
        _ => None,
    };
    Topology::build(kind, n, seed).map_err(|e| CliError::Validation(format!("element '{label}': {e}")))
}

pub fn features(args: &FeaturesArgs) -> Result<FeatureTable, CliError> {
    let (group, perf, n_report) = load_preorder(&args.input)?;
    let n = args
        .n
        .or(n_report)
        .ok_or_else(|| CliError::Validation("--n is required for a bare preorder".into()))?;
    let metrics: Vec<(String, TopologyMetrics)> = perf
        .elements()
        .iter()
        .map(|e| element_topology(e, n, args.ba_seed).map(|t| (e.clone(), t.metrics())))
        .collect::<Result<_, _>>()?;
    let rows: Vec<FeatureRow> = Feature::ALL
        .into_iter()
        .map(|feature| {
            let fp = feature_preorder(&metrics, feature, Direction::Ascending);
            FeatureRow {
                feature,
                direction: Direction::Ascending,
                tau_b: kendall_tau_b(&perf, &fp).ok().map(|k| k.tau_b),
            }
        })
        .collect();
    let table = FeatureTable { group, n, rows };
    let text = serde_json::to_string_pretty(&table).map_err(CliError::runtime)? + "\n";
    emit(args.out.as_deref(), &text)?;
    if let Some(path) = &args.csv {
        let mut csv_text = String::from("feature,direction,tau_b\n");
        for r in &table.rows {
            let tau = r.tau_b.map_or_else(String::new, |t| t.to_string());
            csv_text.push_str(&format!("{},{},{}\n", r.feature, r.direction, tau));
        }
        emit(Some(path), &csv_text)?;
    }
    Ok(table)
}
