use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{clamp_position, OptimizerConfig, Rng};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: f64,
    pub velocity: f64,
    /// Last evaluated fitness, `f64::INFINITY` before the first evaluation.
    pub fitness: f64,
    pub best_position: f64,
    pub best_fitness: f64,
}

impl Particle {
    pub fn at(position: f64) -> Self {
        Particle {
            position,
            velocity: 0.0,
            fitness: f64::INFINITY,
            best_position: position,
            best_fitness: f64::INFINITY,
        }
    }

    /// Stores the fitness of the current position and updates the
    /// personal best.
    pub fn record(&mut self, f: f64) {
        self.fitness = f;
        if f < self.best_fitness {
            self.best_fitness = f;
            self.best_position = self.position;
        }
    }
}

fn clamp_velocity(v: f64, space_size: usize) -> f64 {
    let vmax = super::max_velocity(space_size);
    v.clamp(-vmax, vmax)
}

fn move_particle(
    p: &mut Particle,
    attractor: f64,
    config: &OptimizerConfig,
    space_size: usize,
    rng: &mut Rng,
) {
    let r1: f64 = rng.gen();
    let r2: f64 = rng.gen();
    let v = config.omega * p.velocity
        + config.c1 * r1 * (p.best_position - p.position)
        + config.c2 * r2 * (attractor - p.position);
    p.velocity = clamp_velocity(v, space_size);
    p.position = clamp_position(p.position + p.velocity, space_size);
}

/// Canonical PSO update toward a shared global best.
pub fn pso_step(
    swarm: &mut [Particle],
    gbest: f64,
    config: &OptimizerConfig,
    space_size: usize,
    rng: &mut Rng,
) {
    for p in swarm {
        move_particle(p, gbest, config, space_size, rng);
    }
}

/// PSO update where particle i is pulled toward `attractors[i]`.
pub fn pso_step_toward(
    swarm: &mut [Particle],
    attractors: &[f64],
    config: &OptimizerConfig,
    space_size: usize,
    rng: &mut Rng,
) {
    assert_eq!(swarm.len(), attractors.len());
    for (p, &a) in swarm.iter_mut().zip(attractors) {
        move_particle(p, a, config, space_size, rng);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Species {
    /// Index of the best member.
    pub seed: usize,
    /// All members, seed first, in fitness order.
    pub members: Vec<usize>,
}

/// Greedy speciation over `(position, fitness)` pairs: the fittest
/// unassigned particle founds a species and claims every unassigned particle
/// within `radius` of it.
pub fn species_partition(members: &[(f64, f64)], radius: f64) -> Vec<Species> {
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| members[a].1.total_cmp(&members[b].1).then(a.cmp(&b)));
    let mut assigned = vec![false; members.len()];
    let mut out = Vec::new();
    for &seed in &order {
        if assigned[seed] {
            continue;
        }
        let centre = members[seed].0;
        let claimed: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| !assigned[i] && (members[i].0 - centre).abs() <= radius)
            .collect();
        for &i in &claimed {
            assigned[i] = true;
        }
        out.push(Species {
            seed,
            members: claimed,
        });
    }
    out
}

/// Differential particle step: inertia plus a difference vector of two
/// random other particles plus attraction to the global best.
pub fn dps_step(
    swarm: &mut [Particle],
    config: &OptimizerConfig,
    space_size: usize,
    rng: &mut Rng,
) -> Result<()> {
    let n = swarm.len();
    if n < 3 {
        return Err(Error::config(format!(
            "DPS needs at least 3 particles, got {n}"
        )));
    }
    let gbest = super::swarm_best(swarm);
    let positions: Vec<f64> = swarm.iter().map(|p| p.position).collect();
    for (i, p) in swarm.iter_mut().enumerate() {
        let [r1, r2] = super::de::distinct_others(rng, n, i);
        let r: f64 = rng.gen();
        let v = config.omega * p.velocity
            + config.f_scale * (positions[r1] - positions[r2])
            + config.c2 * r * (gbest - p.position);
        p.velocity = clamp_velocity(v, space_size);
        p.position = clamp_position(p.position + p.velocity, space_size);
    }
    Ok(())
}
