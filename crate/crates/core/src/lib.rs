//! Island-model parallel global optimization with pluggable migration
//! topologies.
//!
//! The crate is organised bottom-up:
//!
//! - [`topology`] builds the migration graphs and computes their graph metrics.
//! - [`problems`] holds the benchmark objectives (Rastrigin, Schwefel,
//!   Lennard-Jones clusters).
//! - [`optimizers`] implements DE/best/2/exp and Corana-style adaptive
//!   simulated annealing as resumable segments.
//! - [`archipelago`] runs one optimizer per island with asynchronous,
//!   elitist, broadcast migration.
//! - [`stats`] turns replicated runs into partial rankings of topologies and
//!   compares those rankings.

pub mod archipelago;
pub mod optimizers;
pub mod problems;
pub mod seed;
pub mod stats;
pub mod topology;

pub use archipelago::{
    run_archipelago, run_replicated, ArchipelagoConfig, ExecutionMode, MigrationSettings,
    RunTrace,
};
pub use optimizers::{Algorithm, DeParams, Individual, OptimizerState, SaParams};
pub use problems::{Objective, Problem};
pub use topology::{Topology, TopologyKind, TopologyMetrics};
