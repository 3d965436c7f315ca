//! Island model with asynchronous, elitist, broadcast migration.
//!
//! Every island alternates between an optimizer segment and a migration
//! step. Migration copies the island's `rate` best members into an inbox
//! slot on each out-neighbour, then drains the island's own inbox, letting
//! each immigrant replace the current worst resident if it is strictly
//! better. Inboxes hold one batch per in-neighbour; a newer batch from the
//! same source overwrites the older one.

use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimizers::{init_state, Algorithm, Individual, OptimizerError, OptimizerState};
use crate::problems::{Objective, Problem};
use crate::seed;
use crate::topology::Topology;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArchipelagoError {
    #[error("{islands} islands configured but the topology has {nodes} nodes")]
    ConfigMismatch { islands: usize, nodes: usize },
    #[error("budget of {budget} evaluations is not divisible by the migration interval {interval}")]
    BudgetIndivisible { budget: u64, interval: u64 },
    #[error("migration rate {rate} must lie between 1 and the population size {population}")]
    InvalidRate { rate: usize, population: usize },
    #[error("at least one repetition is required")]
    NoRepetitions,
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationSettings {
    /// Individuals per emission.
    pub rate: usize,
    /// Evaluations between migrations.
    pub interval_evals: u64,
}

impl MigrationSettings {
    /// 10% of the population every 100 generations for DE, one individual
    /// per 10,000-evaluation annealing cycle for SA.
    pub fn default_for(algo: &Algorithm) -> Self {
        match algo {
            Algorithm::De(p) => MigrationSettings {
                rate: (p.np / 10).max(1),
                interval_evals: 100 * p.np as u64,
            },
            Algorithm::Sa(_) => MigrationSettings {
                rate: 1,
                interval_evals: 10_000,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    /// One thread per island, no barriers.
    #[default]
    Concurrent,
    /// Single thread, islands visited round-robin in id order each period.
    Sequential,
}

/// Order of the two migration halves within a period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MigrationOrder {
    #[default]
    EmitFirst,
    MergeFirst,
}

pub const DEFAULT_BUDGET: u64 = 200_000;

#[derive(Debug, Clone)]
pub struct ArchipelagoConfig {
    pub problem: Problem,
    pub algorithm: Algorithm,
    pub topology: Topology,
    pub n_islands: usize,
    pub migration: MigrationSettings,
    /// Segment evaluations per island, excluding population initialisation.
    pub budget_evals: u64,
    pub master_seed: u64,
    pub mode: ExecutionMode,
    pub order: MigrationOrder,
}

impl ArchipelagoConfig {
    /// Config with the default migration settings and budget for `algorithm`.
    pub fn new(problem: Problem, algorithm: Algorithm, topology: Topology, master_seed: u64) -> Self {
        let migration = MigrationSettings::default_for(&algorithm);
        ArchipelagoConfig {
            problem,
            n_islands: topology.n_nodes(),
            algorithm,
            topology,
            migration,
            budget_evals: DEFAULT_BUDGET,
            master_seed,
            mode: ExecutionMode::default(),
            order: MigrationOrder::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ArchipelagoError> {
        if self.n_islands != self.topology.n_nodes() {
            return Err(ArchipelagoError::ConfigMismatch {
                islands: self.n_islands,
                nodes: self.topology.n_nodes(),
            });
        }
        let interval = self.migration.interval_evals;
        if interval == 0 || self.budget_evals == 0 || !self.budget_evals.is_multiple_of(interval) {
            return Err(ArchipelagoError::BudgetIndivisible {
                budget: self.budget_evals,
                interval,
            });
        }
        let population = self.algorithm.population_size();
        if self.migration.rate == 0 || self.migration.rate > population {
            return Err(ArchipelagoError::InvalidRate {
                rate: self.migration.rate,
                population,
            });
        }
        self.algorithm.validate()?;
        // Segment-level errors surface here rather than mid-run.
        let check = match &self.algorithm {
            Algorithm::De(p) if !interval.is_multiple_of(p.np as u64) => {
                Err(OptimizerError::BudgetNotMultipleOfNp { budget: interval, np: p.np })
            }
            Algorithm::Sa(p) if interval < p.level_evals(self.problem_dims()) => {
                Err(OptimizerError::BudgetTooSmall {
                    budget: interval,
                    level: p.level_evals(self.problem_dims()),
                })
            }
            _ => Ok(()),
        };
        check?;
        Ok(())
    }

    fn problem_dims(&self) -> usize {
        self.problem.dims()
    }

    pub fn periods(&self) -> usize {
        (self.budget_evals / self.migration.interval_evals) as usize
    }
}

/// One row of an island's trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// 1-based migration period.
    pub period: u32,
    /// Evaluations used so far, initialisation included.
    pub evals: u64,
    /// Island best after the merge of this period.
    pub best_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub run_id: u32,
    /// `islands[i][p]` is island `i` after period `p + 1`.
    pub islands: Vec<Vec<TraceEntry>>,
}

impl RunTrace {
    pub fn periods(&self) -> usize {
        self.islands.first().map_or(0, Vec::len)
    }

    /// Best over all islands at each logical period.
    pub fn global_best(&self) -> Vec<f64> {
        (0..self.periods())
            .map(|p| {
                self.islands
                    .iter()
                    .map(|trace| trace[p].best_f)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    pub fn final_global_best(&self) -> f64 {
        self.global_best().last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Hooks into migration for probes and tests. Called from island workers.
pub trait MigrationObserver: Sync {
    fn on_emit(&self, _source: usize, _period: u32, _batch: &[Individual]) {}
    fn after_merge(&self, _island: usize, _period: u32, _population: &[Individual]) {}
}

struct NoObserver;
impl MigrationObserver for NoObserver {}

/// A batch waiting in a slot, stamped with the sender's period.
type Slot = Option<(u32, Vec<Individual>)>;

/// Per-island mailboxes with one slot per in-neighbour.
///
/// Batches carry the period in which they were sent, and a receiver only
/// takes batches sent no later than its own current period. Without a
/// barrier a fast island may otherwise hand a slow neighbour information
/// from the neighbour's future, breaking the one-hop-per-period bound.
pub struct Inboxes {
    slots: Vec<Mutex<Vec<Slot>>>,
    /// Sorted sources per destination; a source's position is its slot.
    in_neighbors: Vec<Vec<usize>>,
    out_neighbors: Vec<Vec<usize>>,
}

impl Inboxes {
    pub fn new(topology: &Topology) -> Self {
        let in_neighbors = topology.in_neighbors();
        let slots = in_neighbors
            .iter()
            .map(|src| Mutex::new(vec![None; src.len()]))
            .collect();
        let out_neighbors = (0..topology.n_nodes())
            .map(|u| topology.out_neighbors(u).to_vec())
            .collect();
        Inboxes {
            slots,
            in_neighbors,
            out_neighbors,
        }
    }

    /// Copies `batch` into the slot reserved for `source` on every
    /// out-neighbour, overwriting any batch not yet drained.
    pub fn deposit(&self, source: usize, period: u32, batch: &[Individual]) {
        for &dest in &self.out_neighbors[source] {
            let slot = self.in_neighbors[dest]
                .binary_search(&source)
                .expect("arc without matching in-neighbour slot");
            let mut guard = self.slots[dest].lock().unwrap_or_else(|e| e.into_inner());
            guard[slot] = Some((period, batch.to_vec()));
        }
    }

    /// Takes every batch for `dest` sent at or before `period`, in source
    /// order. Later batches stay in their slots.
    pub fn drain(&self, dest: usize, period: u32) -> Vec<Individual> {
        let mut guard = self.slots[dest].lock().unwrap_or_else(|e| e.into_inner());
        let mut out = Vec::new();
        for slot in guard.iter_mut() {
            if matches!(slot, Some((sent, _)) if *sent <= period) {
                out.extend(slot.take().map(|(_, b)| b).unwrap_or_default());
            }
        }
        out
    }

    /// Pending batches for `dest` as `(source, sent period, batch)`, without
    /// removing them.
    pub fn pending(&self, dest: usize) -> Vec<(usize, u32, Vec<Individual>)> {
        let guard = self.slots[dest].lock().unwrap_or_else(|e| e.into_inner());
        guard
            .iter()
            .zip(&self.in_neighbors[dest])
            .filter_map(|(b, &src)| b.clone().map(|(p, b)| (src, p, b)))
            .collect()
    }
}

/// Elitist insertion: each immigrant replaces the worst resident when it is
/// strictly better. Returns the number of replacements.
pub fn merge_immigrants(state: &mut OptimizerState, immigrants: Vec<Individual>) -> usize {
    let mut replaced = 0;
    for imm in immigrants {
        let worst = state.worst_index();
        if imm.f < state.population[worst].f {
            state.population[worst] = imm;
            replaced += 1;
        }
    }
    replaced
}

struct Island<'a> {
    id: usize,
    state: OptimizerState,
    trace: Vec<TraceEntry>,
    cfg: &'a ArchipelagoConfig,
    obj: &'a dyn Objective,
}

impl Island<'_> {
    fn step(
        &mut self,
        period: u32,
        inboxes: &Inboxes,
        observer: &dyn MigrationObserver,
    ) -> Result<(), OptimizerError> {
        self.cfg
            .algorithm
            .run_segment(&mut self.state, self.obj, self.cfg.migration.interval_evals)?;
        let emit = |island: &Self| {
            let batch = island.state.best_k(island.cfg.migration.rate);
            observer.on_emit(island.id, period, &batch);
            inboxes.deposit(island.id, period, &batch);
        };
        match self.cfg.order {
            MigrationOrder::EmitFirst => {
                emit(self);
                merge_immigrants(&mut self.state, inboxes.drain(self.id, period));
            }
            MigrationOrder::MergeFirst => {
                merge_immigrants(&mut self.state, inboxes.drain(self.id, period));
                emit(self);
            }
        }
        observer.after_merge(self.id, period, &self.state.population);
        self.trace.push(TraceEntry {
            period,
            evals: self.state.evals_used,
            best_f: self.state.best().f,
        });
        Ok(())
    }
}

/// Runs one archipelago with `cfg.master_seed` as the run seed.
pub fn run_archipelago(cfg: &ArchipelagoConfig) -> Result<RunTrace, ArchipelagoError> {
    run_archipelago_with(cfg, &cfg.problem, &NoObserver)
}

/// Like [`run_archipelago`], with the objective and observer supplied by the
/// caller. `obj` must have the same box as `cfg.problem`.
pub fn run_archipelago_with(
    cfg: &ArchipelagoConfig,
    obj: &dyn Objective,
    observer: &dyn MigrationObserver,
) -> Result<RunTrace, ArchipelagoError> {
    cfg.validate()?;
    let periods = cfg.periods();
    let inboxes = Inboxes::new(&cfg.topology);
    let mut islands: Vec<Island> = (0..cfg.n_islands)
        .map(|id| Island {
            id,
            state: init_state(obj, &cfg.algorithm, seed::island_seed(cfg.master_seed, id as u64), id),
            trace: Vec::with_capacity(periods),
            cfg,
            obj,
        })
        .collect();

    match cfg.mode {
        ExecutionMode::Sequential => {
            for period in 1..=periods as u32 {
                for island in &mut islands {
                    island.step(period, &inboxes, observer)?;
                }
            }
        }
        ExecutionMode::Concurrent => {
            let inboxes = &inboxes;
            std::thread::scope(|scope| {
                let handles: Vec<_> = islands
                    .iter_mut()
                    .map(|island| {
                        scope.spawn(move || -> Result<(), OptimizerError> {
                            for period in 1..=periods as u32 {
                                island.step(period, inboxes, observer)?;
                            }
                            Ok(())
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("island worker panicked"))
                    .collect::<Result<Vec<()>, _>>()
            })?;
        }
    }

    Ok(RunTrace {
        run_id: 0,
        islands: islands.into_iter().map(|i| i.trace).collect(),
    })
}

/// Mean and sample standard deviation of the global best across repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicatedSummary {
    pub repetitions: usize,
    pub final_values: Vec<f64>,
    pub mean_final: f64,
    pub std_final: f64,
    pub per_period_mean: Vec<f64>,
    pub per_period_std: Vec<f64>,
}

impl ReplicatedSummary {
    pub fn from_traces(traces: &[RunTrace]) -> Self {
        let curves: Vec<Vec<f64>> = traces.iter().map(RunTrace::global_best).collect();
        let final_values: Vec<f64> = curves.iter().map(|c| c.last().copied().unwrap_or(f64::NAN)).collect();
        let (mean_final, std_final) = mean_std(&final_values);
        let periods = curves.first().map_or(0, Vec::len);
        let (per_period_mean, per_period_std) = (0..periods)
            .map(|p| mean_std(&curves.iter().map(|c| c[p]).collect::<Vec<_>>()))
            .unzip();
        ReplicatedSummary {
            repetitions: traces.len(),
            final_values,
            mean_final,
            std_final,
            per_period_mean,
            per_period_std,
        }
    }
}

/// Mean and sample (n - 1) standard deviation; the deviation of a single
/// value is zero.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Runs `repetitions` independent archipelagos. Repetition `r` uses
/// `seed::repetition_seed(master_seed, r)` as its run seed.
pub fn run_replicated(
    cfg: &ArchipelagoConfig,
    repetitions: usize,
) -> Result<(Vec<RunTrace>, ReplicatedSummary), ArchipelagoError> {
    if repetitions == 0 {
        return Err(ArchipelagoError::NoRepetitions);
    }
    cfg.validate()?;
    let run = |r: usize| {
        let mut rep_cfg = cfg.clone();
        rep_cfg.master_seed = seed::repetition_seed(cfg.master_seed, r as u64);
        run_archipelago(&rep_cfg).map(|mut t| {
            t.run_id = r as u32;
            t
        })
    };
    let traces: Vec<RunTrace> = match cfg.mode {
        // Single-threaded runs are independent, so repetitions can share cores.
        ExecutionMode::Sequential => (0..repetitions).into_par_iter().map(run).collect::<Result<_, _>>()?,
        ExecutionMode::Concurrent => (0..repetitions).map(run).collect::<Result<_, _>>()?,
    };
    let summary = ReplicatedSummary::from_traces(&traces);
    Ok((traces, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::DeParams;
    use crate::topology::TopologyKind;

    fn individual(f: f64, origin: usize) -> Individual {
        Individual {
            x: vec![f],
            f,
            origin,
        }
    }

    #[test]
    fn broadcast_reaches_every_out_neighbor() {
        let t = Topology::build(TopologyKind::FullyConnected, 3, None).unwrap();
        let inboxes = Inboxes::new(&t);
        inboxes.deposit(0, 1, &[individual(1.0, 0)]);
        assert_eq!(inboxes.pending(1), vec![(0, 1, vec![individual(1.0, 0)])]);
        assert_eq!(inboxes.pending(2), vec![(0, 1, vec![individual(1.0, 0)])]);
        assert!(inboxes.pending(0).is_empty());
    }

    #[test]
    fn newer_batch_overwrites_older_from_same_source() {
        let t = Topology::build(TopologyKind::Ring, 3, None).unwrap();
        let inboxes = Inboxes::new(&t);
        inboxes.deposit(0, 1, &[individual(5.0, 0)]);
        inboxes.deposit(0, 1, &[individual(4.0, 0)]);
        inboxes.deposit(2, 1, &[individual(3.0, 2)]);
        assert_eq!(inboxes.drain(1, 1), vec![individual(4.0, 0), individual(3.0, 2)]);
        assert!(inboxes.drain(1, 1).is_empty());
    }

    #[test]
    fn chain_head_has_no_inbox() {
        let t = Topology::build(TopologyKind::Chain, 2, None).unwrap();
        let inboxes = Inboxes::new(&t);
        inboxes.deposit(0, 1, &[individual(1.0, 0)]);
        inboxes.deposit(1, 1, &[individual(0.5, 1)]);
        assert!(inboxes.drain(0, 1).is_empty());
        assert_eq!(inboxes.drain(1, 1).len(), 1);
    }

    #[test]
    fn batches_from_later_periods_wait() {
        let t = Topology::build(TopologyKind::Chain, 2, None).unwrap();
        let inboxes = Inboxes::new(&t);
        inboxes.deposit(0, 3, &[individual(1.0, 0)]);
        assert!(inboxes.drain(1, 2).is_empty());
        assert_eq!(inboxes.drain(1, 3).len(), 1);
    }

    #[test]
    fn merge_replaces_worst_only_when_strictly_better() {
        let p = Problem::rastrigin(1).unwrap();
        let mut st = init_state(&p, &Algorithm::De(DeParams::default()), 1, 0);
        for (i, ind) in st.population.iter_mut().enumerate() {
            ind.f = i as f64;
        }
        let n = merge_immigrants(&mut st, vec![individual(19.0, 7), individual(-1.0, 7)]);
        assert_eq!(n, 1);
        assert_eq!(st.population[19].f, -1.0);
    }

    #[test]
    fn config_checks() {
        let p = Problem::rastrigin(2).unwrap();
        let t = Topology::build(TopologyKind::Ring, 4, None).unwrap();
        let mut cfg = ArchipelagoConfig::new(p, Algorithm::De(DeParams::default()), t, 1);
        cfg.budget_evals = 4000;
        assert!(cfg.validate().is_ok());
        cfg.n_islands = 5;
        assert!(matches!(cfg.validate(), Err(ArchipelagoError::ConfigMismatch { .. })));
        cfg.n_islands = 4;
        cfg.budget_evals = 5000;
        assert!(matches!(cfg.validate(), Err(ArchipelagoError::BudgetIndivisible { .. })));
        cfg.budget_evals = 4000;
        cfg.migration.rate = 21;
        assert!(matches!(cfg.validate(), Err(ArchipelagoError::InvalidRate { .. })));
    }

    #[test]
    fn default_migration_settings() {
        let de = MigrationSettings::default_for(&Algorithm::De(DeParams::default()));
        assert_eq!((de.rate, de.interval_evals), (2, 2000));
        let sa = MigrationSettings::default_for(&"sa-untuned".parse().unwrap());
        assert_eq!((sa.rate, sa.interval_evals), (1, 10_000));
    }

    #[test]
    fn summary_of_constant_traces() {
        let entry = |p| TraceEntry {
            period: p,
            evals: 0,
            best_f: 2.5,
        };
        let trace = RunTrace {
            run_id: 0,
            islands: vec![vec![entry(1), entry(2)]; 3],
        };
        let s = ReplicatedSummary::from_traces(&[trace.clone(), trace.clone(), trace]);
        assert_eq!(s.mean_final, 2.5);
        assert_eq!(s.std_final, 0.0);
        assert_eq!(s.per_period_std, vec![0.0, 0.0]);
    }
}
