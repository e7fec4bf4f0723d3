//! Gradient-free search over the integer gait space `[1, K]`.
//!
//! Every heuristic works on real-valued 1-D positions that are rounded and
//! clamped to a gait index before each objective query. All queries, repeats
//! included, are charged against the evaluation budget and logged.

mod de;
mod pso;

pub use de::{
    binomial_crossover, de_mutation_best, de_mutation_rand, mutant_best_1, mutant_rand_1,
};
pub use pso::{dps_step, pso_step, pso_step_toward, species_partition, Particle, Species};

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::GaitIndex;
use crate::error::{Error, Result};

/// Version of the JSON layout of [`RunResult`].
pub const RUN_SCHEMA_VERSION: u32 = 1;

/// Generator used for every run, seeded with `seed_from_u64(seed)`.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

pub(crate) type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "PSO")]
    Pso,
    #[serde(rename = "PSOSP")]
    Psosp,
    #[serde(rename = "DPS")]
    Dps,
    #[serde(rename = "DEBEST")]
    DeBest,
    #[serde(rename = "DERAND")]
    DeRand,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Pso,
        Algorithm::Psosp,
        Algorithm::Dps,
        Algorithm::DeBest,
        Algorithm::DeRand,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pso => "PSO",
            Algorithm::Psosp => "PSOSP",
            Algorithm::Dps => "DPS",
            Algorithm::DeBest => "DEBEST",
            Algorithm::DeRand => "DERAND",
        }
    }

    fn min_population(self) -> usize {
        match self {
            Algorithm::Pso | Algorithm::Psosp => 1,
            Algorithm::Dps | Algorithm::DeBest => 3,
            Algorithm::DeRand => 4,
        }
    }

    /// Extra provenance recorded with each run.
    pub fn note(self) -> Option<&'static str> {
        match self {
            Algorithm::Dps => Some(
                "DPS update is a stand-in rule: v <- w*v + F_scale*(x_r1 - x_r2) + c2*r*(gbest - x)",
            ),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::config(format!(
                    "unknown algorithm {s:?}; valid names: {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub population: usize,
    pub budget: usize,
    /// Inertia weight.
    pub omega: f64,
    /// Weight on the personal best.
    pub c1: f64,
    /// Weight on the global (or species) best.
    pub c2: f64,
    /// Differential scaling factor.
    pub f_scale: f64,
    /// Crossover rate.
    pub cr: f64,
    /// Speciation radius in index units.
    pub species_radius: f64,
    pub seed: u64,
    /// Redirect a query whose index was already evaluated in this run to the
    /// nearest unevaluated index (lower one on ties). Off by default.
    #[serde(default)]
    pub exhaustive_fallback: bool,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        OptimizerConfig {
            algorithm,
            population: 10,
            budget: 120,
            omega: 0.5,
            c1: 0.5,
            c2: 2.0,
            f_scale: 0.7,
            cr: 0.5,
            species_radius: 15.0,
            seed: 0,
            exhaustive_fallback: false,
        }
    }

    pub fn validate(&self, space_size: usize) -> Result<()> {
        if space_size == 0 {
            return Err(Error::config("gait space is empty"));
        }
        if self.population == 0 {
            return Err(Error::config("population must be positive"));
        }
        if self.budget < self.population {
            return Err(Error::config(format!(
                "budget {} is smaller than population {}",
                self.budget, self.population
            )));
        }
        if self.population > space_size {
            return Err(Error::config(format!(
                "population {} exceeds the {space_size} distinct gaits",
                self.population
            )));
        }
        let min = self.algorithm.min_population();
        if self.population < min {
            return Err(Error::config(format!(
                "{} needs a population of at least {min}, got {}",
                self.algorithm, self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(Error::config("crossover rate must lie in [0, 1]"));
        }
        if self.species_radius < 0.0 {
            return Err(Error::config("species radius must be non-negative"));
        }
        Ok(())
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::new(Algorithm::Pso)
    }
}

/// Rounds half away from zero, then clamps to `[1, space_size]`.
pub fn decode_candidate(position: f64, space_size: usize) -> GaitIndex {
    let k = space_size as f64;
    let rounded = if position.is_nan() {
        1.0
    } else {
        position.round().clamp(1.0, k)
    };
    GaitIndex::new(rounded as usize, space_size).expect("clamped into range")
}

/// Velocity bound of the swarm methods, half the index range.
pub(crate) fn max_velocity(space_size: usize) -> f64 {
    0.5 * space_size as f64
}

pub(crate) fn clamp_position(x: f64, space_size: usize) -> f64 {
    x.clamp(1.0, space_size as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// 1-based evaluation number.
    pub evaluation: usize,
    pub index: usize,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    pub algorithm: String,
    pub config: Option<OptimizerConfig>,
    pub seed: u64,
    pub rng: String,
    pub space_size: usize,
    pub best_index: usize,
    pub best_f: f64,
    /// Best-so-far objective after each evaluation.
    pub curve: Vec<f64>,
    pub eval_log: Vec<EvalRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Charges queries against the budget and keeps the log.
struct Evaluator<F> {
    objective: F,
    space_size: usize,
    budget: usize,
    log: Vec<EvalRecord>,
    curve: Vec<f64>,
    best: Option<(usize, f64)>,
    /// `Some` when the exhaustive fallback is on; indexed by gait index - 1.
    visited: Option<Vec<bool>>,
}

impl<F: FnMut(GaitIndex) -> f64> Evaluator<F> {
    fn new(objective: F, space_size: usize, budget: usize, fallback: bool) -> Self {
        Evaluator {
            objective,
            space_size,
            budget,
            log: Vec::with_capacity(budget),
            curve: Vec::with_capacity(budget),
            best: None,
            visited: fallback.then(|| vec![false; space_size]),
        }
    }

    fn redirect(&self, index: usize) -> usize {
        let Some(visited) = &self.visited else {
            return index;
        };
        if !visited[index - 1] {
            return index;
        }
        for d in 1..self.space_size {
            if index > d && !visited[index - d - 1] {
                return index - d;
            }
            if index + d <= self.space_size && !visited[index + d - 1] {
                return index + d;
            }
        }
        index
    }

    fn exhausted(&self) -> bool {
        self.log.len() >= self.budget
    }

    /// `None` once the budget is spent.
    fn eval(&mut self, position: f64) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        let decoded = decode_candidate(position, self.space_size);
        let index = GaitIndex::new(self.redirect(decoded.value()), self.space_size)
            .expect("redirect stays in range");
        if let Some(visited) = &mut self.visited {
            visited[index.value() - 1] = true;
        }
        let f = (self.objective)(index);
        self.log.push(EvalRecord {
            evaluation: self.log.len() + 1,
            index: index.value(),
            f,
        });
        // strict improvement keeps the earliest best on ties
        if self.best.is_none_or(|(_, b)| f < b) {
            self.best = Some((index.value(), f));
        }
        self.curve.push(self.best.map_or(f, |(_, b)| b));
        Some(f)
    }

    fn finish(
        self,
        algorithm: String,
        config: Option<OptimizerConfig>,
        seed: u64,
        note: Option<String>,
    ) -> RunResult {
        let (best_index, best_f) = self.best.expect("at least one evaluation");
        RunResult {
            schema_version: RUN_SCHEMA_VERSION,
            algorithm,
            config,
            seed,
            rng: RNG_NAME.to_string(),
            space_size: self.space_size,
            best_index,
            best_f,
            curve: self.curve,
            eval_log: self.log,
            note,
        }
    }
}

/// Runs one optimization of `objective` over `[1, space_size]`, spending
/// exactly `config.budget` queries.
pub fn optimize<F>(objective: F, space_size: usize, config: &OptimizerConfig) -> Result<RunResult>
where
    F: FnMut(GaitIndex) -> f64,
{
    config.validate(space_size)?;
    let mut rng = Rng::seed_from_u64(config.seed);
    let mut ev = Evaluator::new(
        objective,
        space_size,
        config.budget,
        config.exhaustive_fallback,
    );

    // distinct starting gaits
    let start: Vec<f64> = sample(&mut rng, space_size, config.population)
        .into_iter()
        .map(|i| (i + 1) as f64)
        .collect();

    match config.algorithm {
        Algorithm::Pso | Algorithm::Psosp | Algorithm::Dps => {
            run_swarm(&mut ev, start, config, &mut rng)
        }
        Algorithm::DeBest | Algorithm::DeRand => run_de(&mut ev, start, config, &mut rng)?,
    }

    Ok(ev.finish(
        config.algorithm.name().to_string(),
        Some(*config),
        config.seed,
        config.algorithm.note().map(str::to_string),
    ))
}

/// Global best of a swarm: lowest personal-best fitness, earliest particle
/// on ties.
fn swarm_best(swarm: &[Particle]) -> f64 {
    swarm
        .iter()
        .min_by(|a, b| a.best_fitness.total_cmp(&b.best_fitness))
        .map(|p| p.best_position)
        .expect("non-empty swarm")
}

fn run_swarm<F: FnMut(GaitIndex) -> f64>(
    ev: &mut Evaluator<F>,
    start: Vec<f64>,
    config: &OptimizerConfig,
    rng: &mut Rng,
) {
    let k = ev.space_size;
    let vmax = max_velocity(k);
    let mut swarm: Vec<Particle> = start
        .into_iter()
        .map(|x| Particle {
            velocity: rng.gen_range(-vmax..=vmax),
            ..Particle::at(x)
        })
        .collect();
    for p in &mut swarm {
        let f = ev
            .eval(p.position)
            .expect("budget covers the first generation");
        p.record(f);
    }
    while !ev.exhausted() {
        match config.algorithm {
            Algorithm::Pso => {
                let gbest = swarm_best(&swarm);
                pso_step(&mut swarm, gbest, config, k, rng);
            }
            Algorithm::Psosp => {
                let bests: Vec<(f64, f64)> = swarm
                    .iter()
                    .map(|p| (p.best_position, p.best_fitness))
                    .collect();
                let mut attractors = vec![0.0; swarm.len()];
                for species in species_partition(&bests, config.species_radius) {
                    for &m in &species.members {
                        attractors[m] = swarm[species.seed].best_position;
                    }
                }
                pso_step_toward(&mut swarm, &attractors, config, k, rng);
            }
            Algorithm::Dps => {
                dps_step(&mut swarm, config, k, rng).expect("population validated");
            }
            Algorithm::DeBest | Algorithm::DeRand => unreachable!("not a swarm method"),
        }
        for p in &mut swarm {
            let Some(f) = ev.eval(p.position) else { break };
            p.record(f);
        }
    }
}

fn run_de<F: FnMut(GaitIndex) -> f64>(
    ev: &mut Evaluator<F>,
    start: Vec<f64>,
    config: &OptimizerConfig,
    rng: &mut Rng,
) -> Result<()> {
    let k = ev.space_size;
    let mut positions = start;
    let mut fitness = Vec::with_capacity(positions.len());
    for &x in &positions {
        fitness.push(ev.eval(x).expect("budget covers the first generation"));
    }
    while !ev.exhausted() {
        let snapshot = positions.clone();
        let best = (0..fitness.len())
            .min_by(|&a, &b| fitness[a].total_cmp(&fitness[b]))
            .expect("non-empty population");
        for target in 0..snapshot.len() {
            let mutant = match config.algorithm {
                Algorithm::DeBest => {
                    de_mutation_best(&snapshot, best, target, config.f_scale, rng)?
                }
                _ => de_mutation_rand(&snapshot, target, config.f_scale, rng)?,
            };
            let trial = binomial_crossover(&[snapshot[target]], &[mutant], config.cr, rng)[0];
            let trial = clamp_position(trial, k);
            let Some(f) = ev.eval(trial) else { break };
            if f <= fitness[target] {
                positions[target] = trial;
                fitness[target] = f;
            }
        }
    }
    Ok(())
}

/// Queries every index once in ascending order; the reference run that the
/// heuristics are measured against.
pub fn exhaustive_run<F: FnMut(GaitIndex) -> f64>(objective: F, space_size: usize) -> RunResult {
    let mut ev = Evaluator::new(objective, space_size, space_size, false);
    for i in 1..=space_size {
        ev.eval(i as f64);
    }
    ev.finish("EXHAUSTIVE".to_string(), None, 0, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn bowl(target: usize) -> impl Fn(GaitIndex) -> f64 {
        move |g| (g.value() as f64 - target as f64).abs() / 100.0
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_candidate(54.4, 120).value(), 54);
        assert_eq!(decode_candidate(0.2, 120).value(), 1);
        assert_eq!(decode_candidate(120.5, 120).value(), 120);
        assert_eq!(decode_candidate(54.5, 120).value(), 55);
        assert_eq!(decode_candidate(-3.0, 120).value(), 1);
        assert_eq!(decode_candidate(f64::NAN, 120).value(), 1);
    }

    #[test]
    fn decode_is_monotone() {
        let mut prev = 0;
        for k in 0..=2000 {
            let v = decode_candidate(-5.0 + k as f64 * 0.0675, 120).value();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            assert_eq!(a.name().to_lowercase().parse::<Algorithm>().unwrap(), a);
        }
        let err = "CMAES".parse::<Algorithm>().unwrap_err().to_string();
        assert!(err.contains("PSO") && err.contains("DERAND"), "{err}");
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::new(Algorithm::Pso);
        assert!(c.validate(120).is_ok());
        c.budget = 5;
        assert!(matches!(optimize(bowl(3), 120, &c), Err(Error::Config(_))));
        c.budget = 120;
        c.algorithm = Algorithm::DeRand;
        c.population = 3;
        assert!(c.validate(120).is_err());
        c.algorithm = Algorithm::DeBest;
        assert!(c.validate(120).is_ok());
        c.population = 2;
        assert!(c.validate(120).is_err());
        c.algorithm = Algorithm::Pso;
        c.population = 200;
        c.budget = 200;
        assert!(c.validate(120).is_err());
    }

    #[test]
    fn budget_accounting_and_curves() {
        for algorithm in Algorithm::ALL {
            for seed in 0..5 {
                let calls = Cell::new(0usize);
                let f = bowl(77);
                let config = OptimizerConfig {
                    seed,
                    ..OptimizerConfig::new(algorithm)
                };
                let r = optimize(
                    |g| {
                        calls.set(calls.get() + 1);
                        f(g)
                    },
                    120,
                    &config,
                )
                .unwrap();
                assert_eq!(calls.get(), 120);
                assert_eq!(r.eval_log.len(), 120);
                assert_eq!(r.curve.len(), 120);
                assert!(r.curve.windows(2).all(|w| w[1] <= w[0]));
                assert_eq!(*r.curve.last().unwrap(), r.best_f);
                assert!(r.eval_log.iter().all(|e| (1..=120).contains(&e.index)));
                assert!(r
                    .eval_log
                    .iter()
                    .enumerate()
                    .all(|(i, e)| e.evaluation == i + 1));
                // first generation starts on distinct gaits
                let mut first: Vec<usize> = r.eval_log[..10].iter().map(|e| e.index).collect();
                first.sort_unstable();
                first.dedup();
                assert_eq!(first.len(), 10);
                assert!(r.best_f >= 0.0);
                assert_eq!(r.note.is_some(), algorithm == Algorithm::Dps);
            }
        }
    }

    #[test]
    fn budget_equal_to_space_gives_full_curve() {
        let config = OptimizerConfig {
            budget: 40,
            ..OptimizerConfig::new(Algorithm::DeRand)
        };
        let r = optimize(bowl(5), 40, &config).unwrap();
        assert_eq!(r.curve.len(), 40);
    }

    #[test]
    fn same_seed_same_result() {
        for algorithm in Algorithm::ALL {
            let config = OptimizerConfig {
                seed: 7,
                ..OptimizerConfig::new(algorithm)
            };
            let a = optimize(bowl(31), 120, &config).unwrap();
            let b = optimize(bowl(31), 120, &config).unwrap();
            assert_eq!(a, b);
            let other = optimize(bowl(31), 120, &OptimizerConfig { seed: 8, ..config }).unwrap();
            assert_ne!(a.eval_log, other.eval_log);
        }
    }

    #[test]
    fn best_never_beats_exhaustive_minimum() {
        let objective =
            |g: GaitIndex| ((g.value() as f64) * 0.37).sin().abs() + 0.01 * g.value() as f64;
        let oracle = exhaustive_run(objective, 120);
        for algorithm in Algorithm::ALL {
            for seed in 0..10 {
                let r = optimize(
                    objective,
                    120,
                    &OptimizerConfig {
                        seed,
                        ..OptimizerConfig::new(algorithm)
                    },
                )
                .unwrap();
                assert!(r.best_f >= oracle.best_f);
            }
        }
    }

    #[test]
    fn fallback_never_repeats_until_space_is_covered() {
        for algorithm in Algorithm::ALL {
            let config = OptimizerConfig {
                exhaustive_fallback: true,
                seed: 3,
                ..OptimizerConfig::new(algorithm)
            };
            let r = optimize(bowl(10), 120, &config).unwrap();
            let mut seen: Vec<usize> = r.eval_log.iter().map(|e| e.index).collect();
            seen.sort_unstable();
            assert_eq!(seen, (1..=120).collect::<Vec<_>>(), "{algorithm}");
            assert_eq!(r.best_f, 0.0);
        }
        // with the fallback off, a converging swarm repeats itself
        let r = optimize(bowl(10), 120, &OptimizerConfig::new(Algorithm::Pso)).unwrap();
        let mut seen: Vec<usize> = r.eval_log.iter().map(|e| e.index).collect();
        seen.sort_unstable();
        seen.dedup();
        assert!(seen.len() < 120);
    }

    #[test]
    fn exhaustive_run_covers_space() {
        let r = exhaustive_run(bowl(64), 120);
        assert_eq!(r.best_index, 64);
        assert_eq!(r.best_f, 0.0);
        assert_eq!(
            r.eval_log.iter().map(|e| e.index).collect::<Vec<_>>(),
            (1..=120).collect::<Vec<_>>()
        );
    }

    #[test]
    fn finds_bowl_minimum() {
        for algorithm in Algorithm::ALL {
            let hits = (0..20)
                .filter(|&seed| {
                    let r = optimize(
                        bowl(90),
                        120,
                        &OptimizerConfig {
                            seed,
                            ..OptimizerConfig::new(algorithm)
                        },
                    )
                    .unwrap();
                    r.best_index == 90
                })
                .count();
            assert!(hits >= 15, "{algorithm}: {hits}/20");
        }
    }
}
