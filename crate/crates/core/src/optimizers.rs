//! Base algorithms, run in resumable segments between migrations.
//!
//! Both algorithms work on an [`OptimizerState`] that owns its population,
//! its evaluation counter and its random stream, so a segment is a pure
//! function of `(state, params, budget)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problems::{Objective, ProblemKind};
use crate::seed::{self, RandomStream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("evaluation budget {budget} is not a positive multiple of the population size {np}")]
    BudgetNotMultipleOfNp { budget: u64, np: usize },
    #[error("DE needs a population of at least 5, got {0}")]
    PopulationTooSmall(usize),
    #[error("evaluation budget {budget} is below one temperature level ({level} evaluations)")]
    BudgetTooSmall { budget: u64, level: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown algorithm '{0}' (expected de, de:np=..,f=..,cr=.., sa-untuned or sa-tuned:<problem>)")]
    UnknownAlgorithm(String),
}

/// A decision vector with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub f: f64,
    /// Island on which this vector was last produced by an optimizer step.
    pub origin: usize,
}

/// DE/best/2/exp settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeParams {
    pub np: usize,
    pub f: f64,
    pub cr: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            np: 20,
            f: 0.8,
            cr: 0.8,
        }
    }
}

impl DeParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.np < 5 {
            return Err(OptimizerError::PopulationTooSmall(self.np));
        }
        if self.f.is_nan() || self.f < 0.0 {
            return Err(OptimizerError::InvalidParams(format!("F must be >= 0, got {}", self.f)));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(OptimizerError::InvalidParams(format!("CR must lie in [0, 1], got {}", self.cr)));
        }
        Ok(())
    }
}

/// Corana simulated annealing with adaptive neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub t_start: f64,
    pub t_final: f64,
    /// Sweeps between step adjustments.
    pub n_s: usize,
    /// Step adjustments per temperature level.
    pub n_t: usize,
    pub v0: f64,
    /// Step-adjustment constant, applied to growth and shrink alike.
    #[serde(default = "default_step_c")]
    pub step_c: f64,
    /// Reset the step vector to `v0` when re-annealing.
    #[serde(default = "default_true")]
    pub reset_step_on_reanneal: bool,
}

fn default_step_c() -> f64 {
    2.0
}

fn default_true() -> bool {
    true
}

impl SaParams {
    /// Rule-of-thumb settings.
    pub fn untuned() -> Self {
        SaParams {
            t_start: 1.0,
            t_final: 0.001,
            n_s: 20,
            n_t: 1,
            v0: 1.0,
            step_c: 2.0,
            reset_step_on_reanneal: true,
        }
    }

    /// Hand-tuned presets per problem family.
    pub fn tuned(kind: ProblemKind) -> Self {
        let (t_start, t_final, n_s, n_t) = match kind {
            ProblemKind::Rastrigin => (0.1, 0.0001, 5, 2),
            ProblemKind::Schwefel => (1.0, 0.001, 10, 1),
            ProblemKind::LennardJones { .. } => (1.0, 0.0001, 10, 2),
        };
        SaParams {
            t_start,
            t_final,
            n_s,
            n_t,
            ..SaParams::untuned()
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |m: String| Err(OptimizerError::InvalidParams(m));
        if !(self.t_start > self.t_final && self.t_final > 0.0) {
            return bad(format!(
                "temperatures must satisfy T_s > T_f > 0 (got {} and {})",
                self.t_start, self.t_final
            ));
        }
        if self.n_s == 0 || self.n_t == 0 {
            return bad("N_s and N_T must be at least 1".into());
        }
        if self.v0.is_nan() || self.v0 <= 0.0 {
            return bad(format!("v0 must be positive, got {}", self.v0));
        }
        if self.step_c.is_nan() || self.step_c <= 0.0 {
            return bad(format!("step constant must be positive, got {}", self.step_c));
        }
        Ok(())
    }

    /// Evaluations spent on one temperature level of an `n`-dimensional problem.
    pub fn level_evals(&self, n: usize) -> u64 {
        (self.n_s * self.n_t * n) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum Algorithm {
    De(DeParams),
    Sa(SaParams),
}

impl Algorithm {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        match self {
            Algorithm::De(p) => p.validate(),
            Algorithm::Sa(p) => p.validate(),
        }
    }

    pub fn population_size(&self) -> usize {
        match self {
            Algorithm::De(p) => p.np,
            Algorithm::Sa(_) => 1,
        }
    }

    /// Runs one segment of `budget` evaluations.
    pub fn run_segment(
        &self,
        state: &mut OptimizerState,
        obj: &dyn Objective,
        budget: u64,
    ) -> Result<(), OptimizerError> {
        match self {
            Algorithm::De(p) => de_segment(state, obj, p, budget),
            Algorithm::Sa(p) => sa_segment(state, obj, p, budget),
        }
    }

    /// Parses `de`, `de:np=30,f=0.5,cr=0.9`, `sa-untuned` or
    /// `sa-tuned:<family>`. `problem` resolves a bare `sa-tuned`.
    pub fn parse_for(spec: &str, problem: Option<ProblemKind>) -> Result<Self, OptimizerError> {
        let spec = spec.trim().to_ascii_lowercase();
        let unknown = || OptimizerError::UnknownAlgorithm(spec.clone());
        let (head, tail) = match spec.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (spec.as_str(), None),
        };
        match head {
            "de" => {
                let mut p = DeParams::default();
                for kv in tail.into_iter().flat_map(|t| t.split(',')).filter(|s| !s.is_empty()) {
                    let (k, v) = kv.split_once('=').ok_or_else(unknown)?;
                    let bad = || OptimizerError::InvalidParams(format!("bad value in '{kv}'"));
                    match k.trim() {
                        "np" => p.np = v.trim().parse().map_err(|_| bad())?,
                        "f" => p.f = v.trim().parse().map_err(|_| bad())?,
                        "cr" => p.cr = v.trim().parse().map_err(|_| bad())?,
                        _ => return Err(unknown()),
                    }
                }
                p.validate()?;
                Ok(Algorithm::De(p))
            }
            "sa-untuned" | "sa" if tail.is_none() => Ok(Algorithm::Sa(SaParams::untuned())),
            "sa-tuned" => {
                let kind = match tail {
                    Some(fam) => match fam.trim() {
                        f if f.starts_with("rastrigin") => ProblemKind::Rastrigin,
                        f if f.starts_with("schwefel") => ProblemKind::Schwefel,
                        f if f.starts_with("lj") => ProblemKind::LennardJones { atoms: 31 },
                        _ => return Err(unknown()),
                    },
                    None => problem.ok_or_else(unknown)?,
                };
                Ok(Algorithm::Sa(SaParams::tuned(kind)))
            }
            _ => Err(unknown()),
        }
    }
}

impl FromStr for Algorithm {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::parse_for(s, None)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::De(p) if *p == DeParams::default() => f.write_str("de"),
            Algorithm::De(p) => write!(f, "de:np={},f={},cr={}", p.np, p.f, p.cr),
            Algorithm::Sa(p) if *p == SaParams::untuned() => f.write_str("sa-untuned"),
            Algorithm::Sa(p) => {
                let preset = [
                    ProblemKind::Rastrigin,
                    ProblemKind::Schwefel,
                    ProblemKind::LennardJones { atoms: 31 },
                ]
                .into_iter()
                .find(|&k| SaParams::tuned(k) == *p);
                match preset {
                    Some(k) => write!(f, "sa-tuned:{}", k.family()),
                    None => write!(
                        f,
                        "sa(ts={},tf={},ns={},nt={},v0={})",
                        p.t_start, p.t_final, p.n_s, p.n_t, p.v0
                    ),
                }
            }
        }
    }
}

/// Per-island optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub population: Vec<Individual>,
    /// Objective evaluations performed, initialisation included.
    pub evals_used: u64,
    /// Adaptive SA step per coordinate; empty for DE.
    pub step: Vec<f64>,
    pub rng: RandomStream,
    pub island: usize,
}

impl OptimizerState {
    /// Index of the best member; lowest index wins ties.
    pub fn best_index(&self) -> usize {
        best_index(&self.population)
    }

    pub fn best(&self) -> &Individual {
        &self.population[self.best_index()]
    }

    /// Index of the worst member; highest index wins ties.
    pub fn worst_index(&self) -> usize {
        let mut worst = 0;
        for (i, ind) in self.population.iter().enumerate() {
            if ind.f >= self.population[worst].f {
                worst = i;
            }
        }
        worst
    }

    /// The `k` best members, best first.
    pub fn best_k(&self, k: usize) -> Vec<Individual> {
        let mut order: Vec<usize> = (0..self.population.len()).collect();
        order.sort_by(|&a, &b| self.population[a].f.total_cmp(&self.population[b].f).then(a.cmp(&b)));
        order
            .into_iter()
            .take(k)
            .map(|i| self.population[i].clone())
            .collect()
    }
}

fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate().skip(1) {
        if ind.f < pop[best].f {
            best = i;
        }
    }
    best
}

/// Fresh state: `NP` random evaluated members for DE, one for SA.
pub fn init_state(obj: &dyn Objective, algo: &Algorithm, seed: u64, island: usize) -> OptimizerState {
    let mut rng = seed::stream(seed);
    let size = algo.population_size();
    let population = (0..size)
        .map(|_| {
            let x = random_point(obj, &mut rng);
            let f = obj.value(&x);
            Individual { x, f, origin: island }
        })
        .collect();
    let step = match algo {
        Algorithm::Sa(p) => vec![p.v0; obj.dims()],
        Algorithm::De(_) => Vec::new(),
    };
    OptimizerState {
        population,
        evals_used: size as u64,
        step,
        rng,
        island,
    }
}

fn random_point(obj: &dyn Objective, rng: &mut RandomStream) -> Vec<f64> {
    obj.lower()
        .iter()
        .zip(obj.upper())
        .map(|(&lo, &hi)| rng.gen_range(lo..hi))
        .collect()
}

/// Runs `budget / NP` generations of DE/best/2/exp.
///
/// Donors and the best vector come from the population as it stood at the
/// start of each generation. Trial components outside the box are clamped,
/// and a trial replaces its target when it is no worse.
pub fn de_segment(
    state: &mut OptimizerState,
    obj: &dyn Objective,
    params: &DeParams,
    budget: u64,
) -> Result<(), OptimizerError> {
    let np = state.population.len();
    if np < 5 {
        return Err(OptimizerError::PopulationTooSmall(np));
    }
    if np != params.np {
        return Err(OptimizerError::InvalidParams(format!(
            "population holds {np} members but NP = {}",
            params.np
        )));
    }
    params.validate()?;
    if budget == 0 || !budget.is_multiple_of(np as u64) {
        return Err(OptimizerError::BudgetNotMultipleOfNp { budget, np });
    }

    let n = obj.dims();
    let (lower, upper) = (obj.lower(), obj.upper());
    let mut snapshot: Vec<Vec<f64>> = Vec::with_capacity(np);
    for _ in 0..budget / np as u64 {
        snapshot.clear();
        snapshot.extend(state.population.iter().map(|ind| ind.x.clone()));
        let best = best_index(&state.population);
        for j in 0..np {
            let [r1, r2, r3, r4] = distinct_donors(&mut state.rng, np, j);
            let mut trial = snapshot[j].clone();
            let mut k = state.rng.gen_range(0..n);
            let mut copied = 0;
            loop {
                let donor = snapshot[best][k]
                    + params.f * (snapshot[r1][k] - snapshot[r2][k])
                    + params.f * (snapshot[r3][k] - snapshot[r4][k]);
                trial[k] = donor.clamp(lower[k], upper[k]);
                k = (k + 1) % n;
                copied += 1;
                if copied >= n || state.rng.gen::<f64>() >= params.cr {
                    break;
                }
            }
            let f = obj.value(&trial);
            state.evals_used += 1;
            if f <= state.population[j].f {
                state.population[j] = Individual {
                    x: trial,
                    f,
                    origin: state.island,
                };
            }
        }
    }
    Ok(())
}

fn distinct_donors(rng: &mut RandomStream, np: usize, target: usize) -> [usize; 4] {
    let mut picked = [usize::MAX; 4];
    for slot in 0..4 {
        loop {
            let r = rng.gen_range(0..np);
            if r != target && !picked[..slot].contains(&r) {
                picked[slot] = r;
                break;
            }
        }
    }
    picked
}

/// Geometric temperatures from `t_start` down to `t_final` over `levels`
/// steps. A single level runs at `t_start`.
pub fn temperature_schedule(t_start: f64, t_final: f64, levels: usize) -> Vec<f64> {
    match levels {
        0 => Vec::new(),
        1 => vec![t_start],
        _ => {
            let last = (levels - 1) as f64;
            let mut temps: Vec<f64> = (0..levels)
                .map(|k| t_start * (t_final / t_start).powf(k as f64 / last))
                .collect();
            temps[levels - 1] = t_final;
            temps
        }
    }
}

/// Metropolis rule: always take an improvement or a tie, otherwise accept
/// with probability `exp((f_cur - f_new) / t)` given a uniform draw `u`.
pub fn metropolis_accept(f_cur: f64, f_new: f64, temperature: f64, u: f64) -> bool {
    f_new <= f_cur || u < ((f_cur - f_new) / temperature).exp()
}

/// Corana step update from `accepted` moves out of `n_s` proposals.
pub fn adjust_step(step: f64, accepted: u32, n_s: usize, c: f64) -> f64 {
    let ratio = accepted as f64 / n_s as f64;
    if ratio > 0.6 {
        step * (1.0 + c * (ratio - 0.6) / 0.4)
    } else if ratio < 0.4 {
        step / (1.0 + c * (0.4 - ratio) / 0.4)
    } else {
        step
    }
}

/// Runs one full annealing cycle on `budget` evaluations.
///
/// The cycle has `budget / (N_s N_T n)` geometric temperature levels;
/// evaluations left over after the last level are spent as further
/// coordinate sweeps at the final temperature. On return the single
/// population member is the best point seen, so the next cycle re-anneals
/// from it.
pub fn sa_segment(
    state: &mut OptimizerState,
    obj: &dyn Objective,
    params: &SaParams,
    budget: u64,
) -> Result<(), OptimizerError> {
    params.validate()?;
    let n = obj.dims();
    let level = params.level_evals(n);
    if budget < level {
        return Err(OptimizerError::BudgetTooSmall { budget, level });
    }
    if state.population.len() != 1 {
        return Err(OptimizerError::InvalidParams(format!(
            "SA state must hold exactly one member, found {}",
            state.population.len()
        )));
    }
    if state.step.len() != n {
        state.step = vec![params.v0; n];
    }
    let box_width: Vec<f64> = obj.lower().iter().zip(obj.upper()).map(|(l, u)| u - l).collect();

    let schedule = temperature_schedule(params.t_start, params.t_final, (budget / level) as usize);
    let mut walker = Walker {
        obj,
        current: state.population[0].clone(),
        best: state.population[0].clone(),
        accepted: vec![0; n],
        island: state.island,
    };
    let mut spent = 0u64;
    for &t in &schedule {
        for _ in 0..params.n_t {
            for _ in 0..params.n_s {
                for i in 0..n {
                    walker.propose(i, t, &state.step, &mut state.rng);
                }
            }
            spent += (params.n_s * n) as u64;
            for ((step, accepted), &width) in state.step.iter_mut().zip(&mut walker.accepted).zip(&box_width) {
                *step = adjust_step(*step, *accepted, params.n_s, params.step_c).min(width);
                *accepted = 0;
            }
        }
    }
    let t_last = params.t_final;
    let mut i = 0;
    while spent < budget {
        walker.propose(i, t_last, &state.step, &mut state.rng);
        i = (i + 1) % n;
        spent += 1;
    }

    state.evals_used += spent;
    state.population[0] = walker.best;
    if params.reset_step_on_reanneal {
        state.step.iter_mut().for_each(|v| *v = params.v0);
    }
    Ok(())
}

struct Walker<'a> {
    obj: &'a dyn Objective,
    current: Individual,
    best: Individual,
    accepted: Vec<u32>,
    island: usize,
}

impl Walker<'_> {
    fn propose(&mut self, i: usize, t: f64, step: &[f64], rng: &mut RandomStream) {
        let (lo, hi) = (self.obj.lower()[i], self.obj.upper()[i]);
        let old = self.current.x[i];
        let mut cand = old + rng.gen_range(-1.0..=1.0) * step[i];
        if cand < lo || cand > hi {
            cand = rng.gen_range(lo..hi);
        }
        self.current.x[i] = cand;
        let f_new = self.obj.value(&self.current.x);
        let take = f_new <= self.current.f || metropolis_accept(self.current.f, f_new, t, rng.gen());
        if take {
            self.current.f = f_new;
            self.current.origin = self.island;
            self.accepted[i] += 1;
            if f_new < self.best.f {
                self.best.clone_from(&self.current);
            }
        } else {
            self.current.x[i] = old;
        }
    }
}
