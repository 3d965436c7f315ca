//! Box-constrained benchmark objectives.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("decision vector has {got} components, problem expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown problem '{0}' (expected rastrigin250, schwefel250, lj31, rastrigin:<n>, schwefel:<n> or lj:<atoms>)")]
    UnknownProblem(String),
    #[error("invalid problem size: {0}")]
    InvalidSize(String),
}

/// Objective value reported when two atoms coincide.
pub const DEGENERATE_PENALTY: f64 = 1e12;
/// Pair distances below this are treated as coincident atoms.
pub const MIN_PAIR_DISTANCE: f64 = 1e-12;

/// Best-known 31-atom Lennard-Jones cluster energy.
pub const LJ31_BEST_KNOWN: f64 = -133.586422;
/// Per-coordinate location of the Schwefel minimum, as printed to 4 decimals.
pub const SCHWEFEL_OPTIMUM_COORD: f64 = -420.9687;
pub const SCHWEFEL_OFFSET: f64 = 418.9829;

/// Anything an optimizer can minimise over a box.
pub trait Objective: Sync {
    fn dims(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    /// Objective value; `x.len()` must equal `dims()`.
    fn value(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Rastrigin,
    Schwefel,
    LennardJones { atoms: usize },
}

impl ProblemKind {
    /// Family name used by the tuned-parameter presets.
    pub fn family(self) -> &'static str {
        match self {
            ProblemKind::Rastrigin => "rastrigin",
            ProblemKind::Schwefel => "schwefel",
            ProblemKind::LennardJones { .. } => "lj",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    kind: ProblemKind,
    dims: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Problem {
    pub fn rastrigin(n: usize) -> Result<Self, ProblemError> {
        Self::boxed(ProblemKind::Rastrigin, n, -5.12, 5.12)
    }

    pub fn schwefel(n: usize) -> Result<Self, ProblemError> {
        Self::boxed(ProblemKind::Schwefel, n, -500.0, 500.0)
    }

    /// Cluster of `atoms` atoms encoded in `3 * atoms - 6` coordinates.
    pub fn lennard_jones(atoms: usize) -> Result<Self, ProblemError> {
        if atoms < 3 {
            return Err(ProblemError::InvalidSize(format!(
                "Lennard-Jones needs at least 3 atoms, got {atoms}"
            )));
        }
        Self::boxed(ProblemKind::LennardJones { atoms }, 3 * atoms - 6, -3.0, 3.0)
    }

    fn boxed(kind: ProblemKind, n: usize, lo: f64, hi: f64) -> Result<Self, ProblemError> {
        if n == 0 {
            return Err(ProblemError::InvalidSize("dimension must be positive".into()));
        }
        Ok(Problem {
            kind,
            dims: n,
            lower: vec![lo; n],
            upper: vec![hi; n],
        })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// Checked evaluation.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, ProblemError> {
        if x.len() != self.dims {
            return Err(ProblemError::DimensionMismatch {
                expected: self.dims,
                got: x.len(),
            });
        }
        Ok(self.value(x))
    }

    pub fn known_optimum_value(&self) -> Option<f64> {
        match self.kind {
            ProblemKind::Rastrigin | ProblemKind::Schwefel => Some(0.0),
            ProblemKind::LennardJones { atoms: 3 } => Some(-3.0),
            ProblemKind::LennardJones { atoms: 4 } => Some(-6.0),
            ProblemKind::LennardJones { atoms: 31 } => Some(LJ31_BEST_KNOWN),
            ProblemKind::LennardJones { .. } => None,
        }
    }

    pub fn known_optimum_point(&self) -> Option<Vec<f64>> {
        match self.kind {
            ProblemKind::Rastrigin => Some(vec![0.0; self.dims]),
            ProblemKind::Schwefel => Some(vec![SCHWEFEL_OPTIMUM_COORD; self.dims]),
            ProblemKind::LennardJones { .. } => None,
        }
    }

    /// Tolerance within which `known_optimum_point` reproduces the value.
    pub fn known_optimum_tolerance(&self) -> f64 {
        match self.kind {
            ProblemKind::Schwefel => 1e-4 * self.dims as f64,
            _ => 0.0,
        }
    }

    /// Uniform sample of the box.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| rng.gen_range(lo..hi))
            .collect()
    }
}

impl Objective for Problem {
    fn dims(&self) -> usize {
        self.dims
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dims);
        match self.kind {
            ProblemKind::Rastrigin => rastrigin(x),
            ProblemKind::Schwefel => schwefel(x),
            ProblemKind::LennardJones { atoms } => lennard_jones(x, atoms),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ProblemKind::Rastrigin if self.dims == 250 => f.write_str("rastrigin250"),
            ProblemKind::Schwefel if self.dims == 250 => f.write_str("schwefel250"),
            ProblemKind::LennardJones { atoms: 31 } => f.write_str("lj31"),
            ProblemKind::Rastrigin => write!(f, "rastrigin:{}", self.dims),
            ProblemKind::Schwefel => write!(f, "schwefel:{}", self.dims),
            ProblemKind::LennardJones { atoms } => write!(f, "lj:{atoms}"),
        }
    }
}

impl FromStr for Problem {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "rastrigin250" => return Problem::rastrigin(250),
            "schwefel250" => return Problem::schwefel(250),
            "lj31" => return Problem::lennard_jones(31),
            _ => {}
        }
        let (family, size) = s
            .split_once(':')
            .ok_or_else(|| ProblemError::UnknownProblem(s.clone()))?;
        let size: usize = size
            .parse()
            .map_err(|_| ProblemError::InvalidSize(format!("'{size}' is not a positive integer")))?;
        match family {
            "rastrigin" => Problem::rastrigin(size),
            "schwefel" => Problem::schwefel(size),
            "lj" => Problem::lennard_jones(size),
            _ => Err(ProblemError::UnknownProblem(s.clone())),
        }
    }
}

impl Serialize for Problem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Problem {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// `10 n + sum(x_i^2 - 10 cos(2 pi x_i))`.
pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|&xi| xi * xi - 10.0 * (2.0 * PI * xi).cos())
            .sum::<f64>()
}

/// `418.9829 n + sum(x_i sin(sqrt|x_i|))`; minimum near `x_i = -420.9687`.
pub fn schwefel(x: &[f64]) -> f64 {
    SCHWEFEL_OFFSET * x.len() as f64 + x.iter().map(|&xi| xi * xi.abs().sqrt().sin()).sum::<f64>()
}

/// Lennard-Jones potential `4 (r^-12 - r^-6)` of one pair.
pub fn pair_energy(r: f64) -> f64 {
    let inv6 = 1.0 / (r * r * r).powi(2);
    4.0 * (inv6 * inv6 - inv6)
}

/// Decodes the symmetry-pruned encoding: atom 0 at the origin, atom 1 on the
/// x axis, atom 2 in the xy plane, the rest free.
pub fn decode_cluster(x: &[f64], atoms: usize) -> Vec<[f64; 3]> {
    assert_eq!(x.len(), 3 * atoms - 6, "encoding length must be 3N - 6");
    let mut pos = Vec::with_capacity(atoms);
    pos.push([0.0, 0.0, 0.0]);
    pos.push([x[0], 0.0, 0.0]);
    pos.push([x[1], x[2], 0.0]);
    for chunk in x[3..].chunks_exact(3) {
        pos.push([chunk[0], chunk[1], chunk[2]]);
    }
    pos
}

/// Total pair potential of explicit atom positions.
pub fn cluster_energy(positions: &[[f64; 3]]) -> f64 {
    let mut total = 0.0;
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            let r = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            if r < MIN_PAIR_DISTANCE {
                return DEGENERATE_PENALTY;
            }
            total += pair_energy(r);
        }
    }
    total
}

pub fn lennard_jones(x: &[f64], atoms: usize) -> f64 {
    cluster_energy(&decode_cluster(x, atoms))
}
