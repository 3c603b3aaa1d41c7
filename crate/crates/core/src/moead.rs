//! MOEA/D with stable-matching environmental selection.
//!
//! Each generation produces one offspring per subproblem by SBX and
//! polynomial mutation from parents drawn in the subproblem's neighborhood
//! (or, with probability `1 - delta`, the whole population). Parents and
//! offspring form one pool and deferred acceptance picks the survivor of
//! every subproblem.

use std::collections::HashSet;
use std::ops::ControlFlow;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{polynomial_mutation, sbx_crossover, OperatorParams};
use crate::problems::ProblemSpec;
use crate::rng::{stream, Purpose};
use crate::simplex::{ReferencePoint, ReferenceSet};
use crate::stm::{aggregation, stable_match};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborhoodParams {
    #[serde(default = "default_size")]
    pub size: usize,
    /// Probability of mating inside the neighborhood.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_size() -> usize {
    20
}
fn default_delta() -> f64 {
    0.9
}

impl Default for NeighborhoodParams {
    fn default() -> Self {
        Self {
            size: default_size(),
            delta: default_delta(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StmConfig {
    #[serde(default)]
    pub operators: OperatorParams,
    #[serde(default)]
    pub neighborhood: NeighborhoodParams,
    /// Match on objectives rescaled by the pool's ideal-nadir range.
    #[serde(default)]
    pub normalize: bool,
}

impl StmConfig {
    pub fn validate(&self) -> Result<()> {
        let op = &self.operators;
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} = {v} is not a probability")))
            }
        };
        prob("pc", op.pc)?;
        if let Some(pm) = op.pm {
            prob("pm", pm)?;
        }
        prob("neighborhood.delta", self.neighborhood.delta)?;
        if !(op.eta_c >= 0.0 && op.eta_m >= 0.0) {
            return Err(Error::Validation("distribution indices must be >= 0".into()));
        }
        if self.neighborhood.size == 0 {
            return Err(Error::Validation("neighborhood.size must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

impl Individual {
    pub fn evaluate(problem: &ProblemSpec, x: Vec<f64>) -> Self {
        let f = problem.evaluate_unchecked(&x);
        Self { x, f }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    pub weight: ReferencePoint,
    /// Nearest subproblems by weight distance, self first.
    pub neighbors: Vec<usize>,
}

/// Builds subproblems with `size`-nearest neighborhoods (capped at the set size).
pub fn build_subproblems(refset: &ReferenceSet, size: usize) -> Vec<Subproblem> {
    let n = refset.len();
    let t = size.min(n).max(1);
    refset
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut by_dist: Vec<(f64, usize)> = refset
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let d: f64 = w.iter().zip(v.iter()).map(|(a, b)| (a - b).powi(2)).sum();
                    (if i == j { -1.0 } else { d }, j)
                })
                .collect();
            by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            Subproblem {
                weight: w.clone(),
                neighbors: by_dist.into_iter().take(t).map(|(_, j)| j).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub subproblems: Vec<Subproblem>,
    /// `population[i]` is the solution of subproblem `i`.
    pub population: Vec<Individual>,
    pub ideal: Vec<f64>,
    pub generation: usize,
    pub seed: u64,
}

/// Per-generation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub ideal: Vec<f64>,
    pub evaluations: usize,
    pub mean_aggregation: f64,
}

fn ideal_of<'a>(m: usize, fs: impl Iterator<Item = &'a Vec<f64>>) -> Vec<f64> {
    let mut ideal = vec![f64::INFINITY; m];
    for f in fs {
        for (z, v) in ideal.iter_mut().zip(f) {
            *z = z.min(*v);
        }
    }
    ideal
}

fn random_x<R: Rng>(problem: &ProblemSpec, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = problem.bounds();
    (0..problem.n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
}

/// Selects one candidate per subproblem by stable matching.
pub fn select(
    subproblems: &[Subproblem],
    pool: Vec<Individual>,
    ideal: &[f64],
    normalize: bool,
) -> Result<Vec<Individual>> {
    let weights: Vec<ReferencePoint> = subproblems.iter().map(|s| s.weight.clone()).collect();
    let objectives: Vec<Vec<f64>> = pool.iter().map(|ind| ind.f.clone()).collect();
    let assignment = if normalize {
        let m = ideal.len();
        let mut nadir = vec![f64::NEG_INFINITY; m];
        for f in &objectives {
            for (z, v) in nadir.iter_mut().zip(f) {
                *z = z.max(*v);
            }
        }
        let scaled: Vec<Vec<f64>> = objectives
            .iter()
            .map(|f| {
                f.iter()
                    .zip(ideal)
                    .zip(&nadir)
                    .map(|((v, lo), hi)| (v - lo) / (hi - lo).max(1e-12))
                    .collect()
            })
            .collect();
        stable_match(&weights, &scaled, &vec![0.0; m])?
    } else {
        stable_match(&weights, &objectives, ideal)?
    };
    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    Ok(assignment
        .into_iter()
        .map(|c| slots[c].take().expect("matching is injective"))
        .collect())
}

impl OptimizerState {
    /// Random initial population, or a warm start re-evaluated, padded with
    /// random individuals when short and re-matched onto the subproblems.
    pub fn initialize(
        problem: &ProblemSpec,
        refset: &ReferenceSet,
        config: &StmConfig,
        seed: u64,
        warm_start: Option<&[Vec<f64>]>,
    ) -> Result<Self> {
        config.validate()?;
        if refset.m != problem.m {
            return Err(Error::Validation(format!(
                "reference set has m = {}, problem has m = {}",
                refset.m, problem.m
            )));
        }
        if refset.is_empty() {
            return Err(Error::Validation("empty reference set".into()));
        }
        let subproblems = build_subproblems(refset, config.neighborhood.size);
        let n = subproblems.len();
        let (lo, hi) = problem.bounds();
        let population = match warm_start {
            None => {
                let mut rng = stream(seed, Purpose::Initialization, 0, 0);
                (0..n)
                    .map(|_| Individual::evaluate(problem, random_x(problem, &mut rng)))
                    .collect()
            }
            Some(xs) => {
                if let Some(bad) = xs.iter().find(|x| x.len() != problem.n) {
                    return Err(Error::Validation(format!(
                        "warm-start individual has {} variables, expected {}",
                        bad.len(),
                        problem.n
                    )));
                }
                let mut pool: Vec<Individual> = xs
                    .iter()
                    .map(|x| {
                        let x = x.iter().map(|v| v.clamp(lo, hi)).collect();
                        Individual::evaluate(problem, x)
                    })
                    .collect();
                let mut rng = stream(seed, Purpose::Padding, 0, 0);
                while pool.len() < n {
                    pool.push(Individual::evaluate(problem, random_x(problem, &mut rng)));
                }
                let ideal = ideal_of(problem.m, pool.iter().map(|i| &i.f));
                select(&subproblems, pool, &ideal, config.normalize)?
            }
        };
        let ideal = ideal_of(problem.m, population.iter().map(|i: &Individual| &i.f));
        Ok(Self {
            subproblems,
            population,
            ideal,
            generation: 0,
            seed,
        })
    }

    pub fn record(&self, evaluations: usize) -> GenerationRecord {
        let total: f64 = self
            .population
            .iter()
            .zip(&self.subproblems)
            .map(|(ind, sp)| aggregation(&ind.f, &sp.weight, &self.ideal))
            .sum();
        GenerationRecord {
            generation: self.generation,
            ideal: self.ideal.clone(),
            evaluations,
            mean_aggregation: total / self.population.len() as f64,
        }
    }

    /// One generation: variation, ideal update, merged-pool matching.
    pub fn evolve_generation(&self, problem: &ProblemSpec, config: &StmConfig) -> Result<Self> {
        let n = self.population.len();
        let ops = &config.operators;
        let pm = ops.mutation_probability(problem.n);
        let bounds = problem.bounds();
        let gen = self.generation as u64;

        let offspring: Vec<Individual> = (0..n)
            .map(|i| {
                let mut rng = stream(self.seed, Purpose::Offspring, gen, i as u64);
                let local = rng.random::<f64>() < config.neighborhood.delta;
                let pool_len = if local {
                    self.subproblems[i].neighbors.len()
                } else {
                    n
                };
                let pick = |k: usize| if local { self.subproblems[i].neighbors[k] } else { k };
                let a = rng.random_range(0..pool_len);
                let b = if pool_len > 1 {
                    let r = rng.random_range(0..pool_len - 1);
                    if r >= a {
                        r + 1
                    } else {
                        r
                    }
                } else {
                    a
                };
                let (p1, p2) = (&self.population[pick(a)].x, &self.population[pick(b)].x);
                let (c1, c2) = sbx_crossover(p1, p2, ops.pc, ops.eta_c, bounds, &mut rng);
                let child = if rng.random::<bool>() { c1 } else { c2 };
                let child = polynomial_mutation(&child, pm, ops.eta_m, bounds, &mut rng);
                Individual::evaluate(problem, child)
            })
            .collect();

        let mut ideal = self.ideal.clone();
        for child in &offspring {
            for (z, v) in ideal.iter_mut().zip(&child.f) {
                *z = z.min(*v);
            }
        }

        // Exact clones add nothing to the pool.
        let key = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
        let mut seen: HashSet<Vec<u64>> = self.population.iter().map(|i| key(&i.x)).collect();
        let mut pool = self.population.clone();
        for child in offspring {
            if seen.insert(key(&child.x)) {
                pool.push(child);
            }
        }

        let population = select(&self.subproblems, pool, &ideal, config.normalize)?;
        Ok(Self {
            subproblems: self.subproblems.clone(),
            population,
            ideal,
            generation: self.generation + 1,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: OptimizerState,
    /// Entry 0 describes the initial population.
    pub history: Vec<GenerationRecord>,
}

impl RunResult {
    pub fn population(&self) -> &[Individual] {
        &self.state.population
    }
}

/// Runs `generations` generations from a random or warm-started population.
pub fn run(
    problem: &ProblemSpec,
    refset: &ReferenceSet,
    generations: usize,
    seed: u64,
    warm_start: Option<&[Vec<f64>]>,
    config: &StmConfig,
) -> Result<RunResult> {
    run_with_observer(problem, refset, generations, seed, warm_start, config, |_| {
        ControlFlow::Continue(())
    })
}

/// Like [`run`]; the observer sees every generation record and may stop the
/// run, which then yields [`Error::Cancelled`].
pub fn run_with_observer<F>(
    problem: &ProblemSpec,
    refset: &ReferenceSet,
    generations: usize,
    seed: u64,
    warm_start: Option<&[Vec<f64>]>,
    config: &StmConfig,
    mut observer: F,
) -> Result<RunResult>
where
    F: FnMut(&GenerationRecord) -> ControlFlow<()>,
{
    let mut state = OptimizerState::initialize(problem, refset, config, seed, warm_start)?;
    let n = state.population.len();
    let mut evaluations = n;
    let mut history = vec![state.record(evaluations)];
    if observer(&history[0]).is_break() {
        return Err(Error::Cancelled);
    }
    for _ in 0..generations {
        state = state.evolve_generation(problem, config)?;
        evaluations += n;
        let rec = state.record(evaluations);
        let flow = observer(&rec);
        history.push(rec);
        if flow.is_break() {
            return Err(Error::Cancelled);
        }
    }
    Ok(RunResult { state, history })
}
