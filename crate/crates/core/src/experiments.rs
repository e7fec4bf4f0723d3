//! Exhaustive enumeration of recovery gaits, the brute-force oracle, and the
//! multi-run convergence study.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{
    enumerate_indices, reduced_space, to_assignment, FailureScenario, GaitIndex, Leg,
};
use crate::error::{Error, Result};
use crate::optimizers::{optimize, Algorithm, OptimizerConfig, RunResult};
use crate::sim::{deviation, simulate, SimConfig, Trajectory};

/// Version of the JSON layout of enumeration and convergence reports.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_MASTER_SEED: u64 = 0x5EED;

/// Objective of every gait index of the scenario, in index order. Gaits are
/// simulated in parallel; the result does not depend on scheduling.
pub fn objective_table(scenario: FailureScenario, config: &SimConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let (_, size) = reduced_space(scenario);
    (1..=size)
        .into_par_iter()
        .map(|index| {
            let gait = to_assignment(index, scenario)?;
            let traj = simulate(&gait, scenario, config)?;
            Ok(deviation(&traj, config.params.theta))
        })
        .collect()
}

/// Lowest value, lowest index on ties. Returns a 1-based index.
fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (1, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best.1 {
            best = (i + 1, v);
        }
    }
    best
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Brute-force minimum over the whole gait space.
pub fn oracle_best(scenario: FailureScenario, config: &SimConfig) -> Result<(GaitIndex, f64)> {
    let table = objective_table(scenario, config)?;
    let (index, f) = argmin(&table);
    Ok((GaitIndex::new(index, table.len())?, f))
}

pub fn trajectory_file_name(scenario: FailureScenario, index: usize) -> String {
    format!("traj_{}_{}.csv", scenario.label(), index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationEntry {
    pub index: usize,
    pub f: f64,
    pub mean_y: f64,
    pub final_x: f64,
    pub final_y: f64,
    pub final_psi: f64,
    pub stable_fraction: f64,
    pub trajectory_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub schema_version: u32,
    pub scenario: String,
    pub failed_leg: Option<Leg>,
    pub self_rotation: bool,
    pub theta_cmd: f64,
    pub space_size: usize,
    pub argmin: usize,
    pub min_f: f64,
    pub median_f: f64,
    pub max_f: f64,
    pub entries: Vec<EnumerationEntry>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

impl EnumerationReport {
    pub fn objectives(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.f).collect()
    }
}

/// Simulates every gait of the scenario for the full horizon.
pub fn run_enumeration(scenario: FailureScenario, config: &SimConfig) -> Result<EnumerationReport> {
    config.validate()?;
    let indices: Vec<GaitIndex> = enumerate_indices(scenario).collect();
    let trajectories: Vec<Trajectory> = indices
        .par_iter()
        .map(|idx| simulate(&to_assignment(idx.value(), scenario)?, scenario, config))
        .collect::<Result<_>>()?;

    let theta = config.params.theta;
    let entries: Vec<EnumerationEntry> = trajectories
        .iter()
        .map(|traj| {
            let end = traj.final_pose();
            EnumerationEntry {
                index: traj.gait.value(),
                f: deviation(traj, theta),
                mean_y: traj.mean_y(),
                final_x: end.x,
                final_y: end.y,
                final_psi: end.psi,
                stable_fraction: traj.stable_fraction(),
                trajectory_file: trajectory_file_name(scenario, traj.gait.value()),
            }
        })
        .collect();
    let fs: Vec<f64> = entries.iter().map(|e| e.f).collect();
    let (argmin, min_f) = argmin(&fs);
    Ok(EnumerationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: scenario.label(),
        failed_leg: scenario.failed_leg(),
        self_rotation: config.self_rotation,
        theta_cmd: theta,
        space_size: entries.len(),
        argmin,
        min_f,
        median_f: median(&fs),
        max_f: fs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        entries,
        trajectories,
    })
}

/// Seed of run `run` of `algorithm` on `scenario`: 64-bit FNV-1a over the
/// little-endian master seed, one scenario byte (0 for no failure, else the
/// failed leg), the ASCII algorithm name, and the little-endian run number.
pub fn derive_seed(master: u64, scenario: FailureScenario, algorithm: Algorithm, run: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut bytes = Vec::with_capacity(32);
    bytes.extend_from_slice(&master.to_le_bytes());
    bytes.push(scenario.failed_leg().unwrap_or(0));
    bytes.extend_from_slice(algorithm.name().as_bytes());
    bytes.extend_from_slice(&run.to_le_bytes());
    bytes
        .into_iter()
        .fold(OFFSET, |h, b| (h ^ b as u64).wrapping_mul(PRIME))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub runs: usize,
    pub master_seed: u64,
    /// Template for every run; algorithm and seed are filled in per run.
    pub optimizer: OptimizerConfig,
    pub sim: SimConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            runs: 30,
            master_seed: DEFAULT_MASTER_SEED,
            optimizer: OptimizerConfig::default(),
            sim: SimConfig {
                self_rotation: true,
                ..SimConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub scenario: String,
    pub failed_leg: Option<Leg>,
    pub algorithm: Algorithm,
    pub self_rotation: bool,
    pub master_seed: u64,
    pub budget: usize,
    pub population: usize,
    pub oracle_index: usize,
    pub oracle_f: f64,
    /// Mean best-so-far objective after each evaluation.
    pub mean_curve: Vec<f64>,
    pub runs: Vec<RunResult>,
}

impl ConvergenceReport {
    /// Runs whose final best is within `tol` of the oracle minimum.
    pub fn oracle_hits(&self, tol: f64) -> usize {
        self.runs
            .iter()
            .filter(|r| (r.best_f - self.oracle_f).abs() <= tol)
            .count()
    }

    pub fn scenario(&self) -> FailureScenario {
        match self.failed_leg {
            Some(leg) => FailureScenario::failed(leg).expect("report holds a valid leg"),
            None => FailureScenario::INTACT,
        }
    }
}

fn mean_curve(runs: &[RunResult], budget: usize) -> Vec<f64> {
    let n = runs.len() as f64;
    (0..budget)
        .map(|e| runs.iter().map(|r| r.curve[e]).sum::<f64>() / n)
        .collect()
}

/// Every (scenario, algorithm) pair, `study.runs` seeded runs each. Each
/// scenario's gait space is simulated once and shared by all its runs;
/// every optimizer query is still logged and charged.
pub fn run_convergence_study(
    scenarios: &[FailureScenario],
    algorithms: &[Algorithm],
    study: &StudyConfig,
) -> Result<Vec<ConvergenceReport>> {
    if study.runs == 0 {
        return Err(Error::config("number of runs must be positive"));
    }
    let mut reports = Vec::with_capacity(scenarios.len() * algorithms.len());
    for &scenario in scenarios {
        let table = objective_table(scenario, &study.sim)?;
        let (oracle_index, oracle_f) = argmin(&table);
        for &algorithm in algorithms {
            let template = OptimizerConfig {
                algorithm,
                ..study.optimizer
            };
            template.validate(table.len())?;
            let runs: Vec<RunResult> = (0..study.runs as u64)
                .into_par_iter()
                .map(|run| {
                    let config = OptimizerConfig {
                        seed: derive_seed(study.master_seed, scenario, algorithm, run),
                        ..template
                    };
                    optimize(|g: GaitIndex| table[g.value() - 1], table.len(), &config)
                })
                .collect::<Result<_>>()?;
            reports.push(ConvergenceReport {
                schema_version: REPORT_SCHEMA_VERSION,
                scenario: scenario.label(),
                failed_leg: scenario.failed_leg(),
                algorithm,
                self_rotation: study.sim.self_rotation,
                master_seed: study.master_seed,
                budget: template.budget,
                population: template.population,
                oracle_index,
                oracle_f,
                mean_curve: mean_curve(&runs, template.budget),
                runs,
            });
        }
    }
    Ok(reports)
}

/// Mean over runs of best-so-far minus the oracle minimum, per evaluation.
pub fn regret_summary(report: &ConvergenceReport) -> Vec<f64> {
    let n = report.runs.len() as f64;
    (0..report.budget)
        .map(|e| {
            report
                .runs
                .iter()
                .map(|r| r.curve[e] - report.oracle_f)
                .sum::<f64>()
                / n
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::exhaustive_run;

    fn failed(leg: Leg) -> FailureScenario {
        FailureScenario::failed(leg).unwrap()
    }

    fn quick() -> SimConfig {
        SimConfig {
            duration: 4.0,
            self_rotation: true,
            ..SimConfig::default()
        }
    }

    #[test]
    fn oracle_with_no_motion_picks_index_one() {
        let mut cfg = quick();
        cfg.params.amplitude = 0.0;
        let (idx, f) = oracle_best(failed(3), &cfg).unwrap();
        assert_eq!((idx.value(), f), (1, 0.0));
    }

    #[test]
    fn oracle_covers_space_and_is_repeatable() {
        let cfg = quick();
        let table = objective_table(failed(1), &cfg).unwrap();
        assert_eq!(table.len(), 120);
        let a = oracle_best(failed(1), &cfg).unwrap();
        let b = oracle_best(failed(1), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(table.iter().all(|&f| f >= a.1));
        assert!(table[..a.0.value() - 1].iter().all(|&f| f > a.1));
    }

    #[test]
    fn argmin_prefers_lowest_index() {
        assert_eq!(argmin(&[3.0, 1.0, 1.0, 2.0]), (2, 1.0));
        assert_eq!(argmin(&[0.0; 5]), (1, 0.0));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn enumeration_covers_each_index_once() {
        let cfg = SimConfig {
            duration: 1.0,
            ..SimConfig::default()
        };
        let report = run_enumeration(FailureScenario::INTACT, &cfg).unwrap();
        assert_eq!(report.entries.len(), 720);
        let idx: Vec<usize> = report.entries.iter().map(|e| e.index).collect();
        let expected: Vec<usize> = enumerate_indices(FailureScenario::INTACT)
            .map(|g| g.value())
            .collect();
        assert_eq!(idx, expected);
        assert_eq!(report.trajectories.len(), 720);
        assert_eq!(report.entries[4].trajectory_file, "traj_none_5.csv");
    }

    #[test]
    fn enumeration_statistics() {
        let report = run_enumeration(failed(1), &quick()).unwrap();
        assert!(report.min_f < report.median_f);
        assert!(report.median_f <= report.max_f);
        assert_eq!(report.entries[report.argmin - 1].f, report.min_f);
        assert!(report.self_rotation);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let s = derive_seed(1, failed(2), Algorithm::Pso, 0);
        assert_eq!(s, derive_seed(1, failed(2), Algorithm::Pso, 0));
        let mut all = Vec::new();
        for leg in 1..=6 {
            for a in Algorithm::ALL {
                for run in 0..30 {
                    all.push(derive_seed(1, failed(leg), a, run));
                }
            }
        }
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n);
        assert_ne!(derive_seed(2, failed(2), Algorithm::Pso, 0), s);
    }

    #[test]
    fn fnv_reference_value() {
        // FNV-1a of the empty input is the offset basis; one zero byte
        // multiplies it by the prime.
        let h = [0u8].iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
            (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
        });
        assert_eq!(h, 0xaf63_bd4c_8601_b7df);
    }

    #[test]
    fn study_reports_are_consistent() {
        let study = StudyConfig {
            runs: 4,
            sim: quick(),
            ..StudyConfig::default()
        };
        let reports =
            run_convergence_study(&[failed(1)], &[Algorithm::Pso, Algorithm::DeRand], &study)
                .unwrap();
        assert_eq!(reports.len(), 2);
        for r in &reports {
            assert_eq!(r.runs.len(), 4);
            assert_eq!(r.mean_curve.len(), 120);
            assert!(r.mean_curve.windows(2).all(|w| w[1] <= w[0]));
            assert!(r.runs.iter().all(|run| run.best_f >= r.oracle_f));
            let regret = regret_summary(r);
            assert!(regret.iter().all(|&x| x >= 0.0));
            assert!(regret.windows(2).all(|w| w[1] <= w[0]));
            assert!(regret[19] <= regret[0]);
        }
        let again =
            run_convergence_study(&[failed(1)], &[Algorithm::Pso, Algorithm::DeRand], &study)
                .unwrap();
        assert_eq!(reports, again);
    }

    #[test]
    fn exhaustive_reference_has_zero_final_regret() {
        let cfg = quick();
        let scenario = failed(4);
        let table = objective_table(scenario, &cfg).unwrap();
        let run = exhaustive_run(|g| table[g.value() - 1], table.len());
        let (oracle_index, oracle_f) = argmin(&table);
        let report = ConvergenceReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: scenario.label(),
            failed_leg: scenario.failed_leg(),
            algorithm: Algorithm::Pso,
            self_rotation: true,
            master_seed: 0,
            budget: 120,
            population: 10,
            oracle_index,
            oracle_f,
            mean_curve: run.curve.clone(),
            runs: vec![run],
        };
        assert_eq!(*regret_summary(&report).last().unwrap(), 0.0);
        assert_eq!(report.oracle_hits(0.0), 1);
    }

    #[test]
    fn zero_runs_rejected() {
        let study = StudyConfig {
            runs: 0,
            ..StudyConfig::default()
        };
        assert!(run_convergence_study(&[failed(1)], &[Algorithm::Pso], &study).is_err());
    }
}
