//! Experiment configuration files and their expansion into setups.

use std::path::{Path, PathBuf};

use migtopo_core::archipelago::{MigrationOrder, MigrationSettings, DEFAULT_BUDGET};
use migtopo_core::{Algorithm, ArchipelagoConfig, ExecutionMode, Problem, Topology, TopologyKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "MIGTOPO_OUT";
pub const DEFAULT_OUTPUT: &str = "results";

/// A single value or a list; lists expand into a cross product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MigrationOverride {
    pub rate: Option<usize>,
    pub interval_evals: Option<u64>,
}

/// On-disk experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(alias = "problems")]
    pub problem: OneOrMany<String>,
    #[serde(alias = "algorithms")]
    pub algorithm: OneOrMany<String>,
    /// Kind names, or `file:<path>` for a DOT file.
    #[serde(alias = "topologies")]
    pub topology: OneOrMany<String>,
    /// One setup per seed for every Barabasi-Albert entry.
    #[serde(default = "default_ba_seeds")]
    pub ba_seeds: Vec<u64>,
    pub n_islands: OneOrMany<usize>,
    #[serde(default)]
    pub migration: MigrationOverride,
    #[serde(default = "default_budget")]
    pub budget_evals: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub mode: ExecutionMode,
    #[serde(default)]
    pub order: MigrationOrder,
    /// SA only: restore the initial step at the start of each cycle.
    #[serde(default)]
    pub sa_reset_step: Option<bool>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_ba_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

fn default_repetitions() -> usize {
    30
}

fn default_seed() -> u64 {
    1
}

/// Everything that determines a setup's results; hashed for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupSpec {
    pub problem: String,
    pub algorithm: Algorithm,
    pub topology: String,
    pub topology_seed: Option<u64>,
    /// Arcs of a topology read from a file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology_arcs: Option<Vec<(usize, usize)>>,
    pub n_islands: usize,
    pub migration: MigrationSettings,
    pub budget_evals: u64,
    pub repetitions: usize,
    pub master_seed: u64,
    pub mode: ExecutionMode,
    pub order: MigrationOrder,
}

impl SetupSpec {
    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("setup spec serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// One cell of the experiment grid, ready to run.
#[derive(Debug, Clone)]
pub struct Setup {
    /// Directory name, unique within a batch.
    pub label: String,
    /// Element name used when ranking topologies within a group.
    pub topology_label: String,
    /// Setups sharing problem, algorithm and island count.
    pub group: String,
    pub spec: SetupSpec,
    pub hash: String,
    pub archipelago: ArchipelagoConfig,
}

/// Replaces characters that are awkward in file names.
pub fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '+' | '.' | '_' | '-' | '@') {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn invalid(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {message}"))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    /// Output root: the config's own setting, then the environment, then
    /// `results`.
    pub fn output_root(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
    }

    /// Expands the cross product and validates every setup. `base` resolves
    /// relative topology file paths.
    pub fn expand(&self, base: &Path) -> Result<Vec<Setup>, CliError> {
        if self.repetitions == 0 {
            return Err(invalid("repetitions", "must be at least 1"));
        }
        if self.budget_evals == 0 {
            return Err(invalid("budget_evals", "must be positive"));
        }
        let lists = (
            self.problem.to_vec(),
            self.algorithm.to_vec(),
            self.topology.to_vec(),
            self.n_islands.to_vec(),
        );
        for (name, empty) in [
            ("problem", lists.0.is_empty()),
            ("algorithm", lists.1.is_empty()),
            ("topology", lists.2.is_empty()),
            ("n_islands", lists.3.is_empty()),
        ] {
            if empty {
                return Err(invalid(name, "list is empty"));
            }
        }
        let mut setups = Vec::new();
        for problem_name in &lists.0 {
            let problem: Problem = problem_name.parse().map_err(|e| invalid("problem", e))?;
            for algo_name in &lists.1 {
                let mut algorithm =
                    Algorithm::parse_for(algo_name, Some(problem.kind())).map_err(|e| invalid("algorithm", e))?;
                if let (Algorithm::Sa(p), Some(reset)) = (&mut algorithm, self.sa_reset_step) {
                    p.reset_step_on_reanneal = reset;
                }
                for &n in &lists.3 {
                    for topo_name in &lists.2 {
                        for (topology, seed) in self.topologies(topo_name, n, base)? {
                            setups.push(self.setup(&problem, &algorithm, topology, topo_name, seed, n)?);
                        }
                    }
                }
            }
        }
        let mut labels = std::collections::HashSet::new();
        for s in &setups {
            if !labels.insert(s.label.clone()) {
                return Err(invalid("topology", format!("setup '{}' appears twice", s.label)));
            }
        }
        Ok(setups)
    }

    fn topologies(&self, name: &str, n: usize, base: &Path) -> Result<Vec<(Topology, Option<u64>)>, CliError> {
        if let Some(path) = name.strip_prefix("file:") {
            let path = base.join(path);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| invalid("topology", format!("cannot read {}: {e}", path.display())))?;
            let t = Topology::from_dot(&text).map_err(|e| invalid("topology", e))?;
            if t.n_nodes() != n {
                return Err(invalid(
                    "n_islands",
                    format!("{n} islands but {} has {} nodes", path.display(), t.n_nodes()),
                ));
            }
            let seed = t.seed();
            return Ok(vec![(t, seed)]);
        }
        let kind: TopologyKind = name.parse().map_err(|e| invalid("topology", e))?;
        kind.check_nodes(n).map_err(|e| invalid("n_islands", e))?;
        let seeds: Vec<Option<u64>> = match kind {
            TopologyKind::BarabasiAlbert { .. } => {
                if self.ba_seeds.is_empty() {
                    return Err(invalid("ba_seeds", "at least one seed is needed for ba"));
                }
                self.ba_seeds.iter().copied().map(Some).collect()
            }
            _ => vec![None],
        };
        seeds
            .into_iter()
            .map(|s| {
                Topology::build(kind, n, s)
                    .map(|t| (t, s))
                    .map_err(|e| invalid("topology", e))
            })
            .collect()
    }

    fn setup(
        &self,
        problem: &Problem,
        algorithm: &Algorithm,
        topology: Topology,
        topo_name: &str,
        seed: Option<u64>,
        n: usize,
    ) -> Result<Setup, CliError> {
        let mut arch = ArchipelagoConfig::new(problem.clone(), algorithm.clone(), topology, self.master_seed);
        if let Some(rate) = self.migration.rate {
            arch.migration.rate = rate;
        }
        if let Some(interval) = self.migration.interval_evals {
            arch.migration.interval_evals = interval;
        }
        arch.budget_evals = self.budget_evals;
        arch.mode = self.mode;
        arch.order = self.order;
        arch.validate().map_err(|e| {
            use migtopo_core::archipelago::ArchipelagoError as E;
            let field = match &e {
                E::ConfigMismatch { .. } => "n_islands",
                E::BudgetIndivisible { .. } => "budget_evals",
                E::InvalidRate { .. } => "migration.rate",
                E::Optimizer(_) => "migration.interval_evals",
                E::NoRepetitions => "repetitions",
            };
            invalid(field, e)
        })?;

        let from_file = topo_name.starts_with("file:");
        let kind_name = arch.topology.kind().to_string();
        let topology_label = match (from_file, seed) {
            (true, _) => sanitize(topo_name.trim_start_matches("file:")),
            (false, Some(s)) => format!("{kind_name}@{s}"),
            (false, None) => kind_name.clone(),
        };
        let spec = SetupSpec {
            problem: problem.to_string(),
            algorithm: algorithm.clone(),
            topology: if from_file { topo_name.to_string() } else { kind_name },
            topology_seed: seed,
            topology_arcs: from_file.then(|| arch.topology.arcs().collect()),
            n_islands: n,
            migration: arch.migration,
            budget_evals: self.budget_evals,
            repetitions: self.repetitions,
            master_seed: self.master_seed,
            mode: self.mode,
            order: self.order,
        };
        let group = sanitize(&format!("{}__{}__n{}", problem, algorithm, n));
        Ok(Setup {
            label: sanitize(&format!("{}__{}__{}__n{}", problem, algorithm, topology_label, n)),
            topology_label,
            group,
            hash: spec.hash(),
            spec,
            archipelago: arch,
        })
    }
}
