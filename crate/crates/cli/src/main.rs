use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hexgait::config::ModelConfig;
use hexgait::encoding::{
    parse_legs, rank, reduced_space, to_assignment, unrank, FailureScenario, Permutation,
};
use hexgait::experiments::{
    regret_summary, run_convergence_study, run_enumeration, trajectory_file_name,
    ConvergenceReport, EnumerationReport, StudyConfig, DEFAULT_MASTER_SEED,
};
use hexgait::optimizers::{Algorithm, OptimizerConfig};
use hexgait::output::{
    convergence_csv, convergence_svg, read_json, trajectory_csv, trajectory_svg, ArtifactWriter,
};
use hexgait::sim::{deviation, simulate, SimConfig};

/// Gait recovery for a hexapod robot with a failed leg.
#[derive(Debug, Parser)]
#[command(name = "hexgait", version)]
struct Cli {
    /// Model configuration file (flat `key = value`); built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for generated CSV, JSON and SVG files.
    #[arg(long, global = true, env = "HEXGAIT_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,

    /// Master seed from which every optimizer run seed is derived.
    #[arg(long, global = true, default_value_t = DEFAULT_MASTER_SEED)]
    seed: u64,

    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the 1-based index of a comma-separated leg sequence.
    Rank {
        legs: String,
        /// Failed leg; the sequence must then list the other five legs.
        #[arg(long)]
        failed: Option<String>,
    },
    /// Print the leg sequence with the given 1-based index.
    Unrank {
        index: usize,
        /// Failed leg (1-6 or `none`).
        #[arg(long, default_value = "none")]
        failed: String,
    },
    /// Simulate one gait and write its trajectory CSV.
    Simulate {
        /// Failed leg (1-6 or `none`).
        #[arg(long)]
        failed: String,
        #[arg(long)]
        gait_index: usize,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Simulate every gait of one or all failure scenarios.
    Enumerate {
        /// Failed leg (1-6), `none`, or `all` for the six single failures.
        #[arg(long)]
        failed: String,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Run the multi-run optimizer convergence study.
    Optimize {
        /// Algorithm name (PSO, PSOSP, DPS, DEBEST, DERAND) or `all`.
        #[arg(long, default_value = "all")]
        algorithm: String,
        /// Failed leg (1-6), `none`, or `all` for the six single failures.
        #[arg(long, default_value = "all")]
        failed: String,
        /// Independent runs per scenario and algorithm.
        #[arg(long, default_value_t = 30)]
        runs: usize,
        /// Objective evaluations per run.
        #[arg(long, default_value_t = 120)]
        budget: usize,
        #[arg(long, default_value_t = 10)]
        population: usize,
        /// Redirect repeated queries to the nearest unevaluated gait.
        #[arg(long)]
        exhaustive_fallback: bool,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Summarize the JSON reports found in a directory.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Rotate the body before walking to cancel the drift of the failed leg.
    #[arg(long)]
    self_rotation: bool,
    /// Commanded heading in degrees [default: config value, 180].
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Step amplitude in meters [default: 0.11 x size factor].
    #[arg(long)]
    amplitude: Option<f64>,
}

fn parse_scenario(s: &str) -> Result<FailureScenario> {
    Ok(s.parse::<FailureScenario>()?)
}

fn parse_scenarios(s: &str) -> Result<Vec<FailureScenario>> {
    if s.eq_ignore_ascii_case("all") {
        Ok(FailureScenario::single_failures().collect())
    } else {
        Ok(vec![parse_scenario(s)?])
    }
}

fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    if s.eq_ignore_ascii_case("all") {
        Ok(Algorithm::ALL.to_vec())
    } else {
        Ok(vec![s.parse::<Algorithm>()?])
    }
}

fn model_config(cli: &Cli, args: &ModelArgs) -> Result<SimConfig> {
    let base = match &cli.config {
        Some(path) => ModelConfig::load(path)?,
        None => ModelConfig::default(),
    };
    let mut sim = base.to_sim()?;
    sim.self_rotation |= args.self_rotation;
    if let Some(deg) = args.theta {
        sim.params.theta = deg.to_radians();
    }
    if let Some(a) = args.amplitude {
        sim.params.amplitude = a;
    }
    sim.validate()?;
    Ok(sim)
}

fn cmd_rank(legs: &str, failed: Option<&str>) -> Result<()> {
    let elements = parse_legs(legs)?;
    let perm = match failed {
        Some(f) => Permutation::new(elements, &reduced_space(parse_scenario(f)?).0)?,
        None => Permutation::from_elements(elements)?,
    };
    println!("{}", rank(&perm));
    Ok(())
}

fn cmd_unrank(index: usize, failed: &str) -> Result<()> {
    let (ground, _) = reduced_space(parse_scenario(failed)?);
    println!("{}", unrank(index, &ground)?);
    Ok(())
}

fn cmd_simulate(cli: &Cli, failed: &str, gait_index: usize, model: &ModelArgs) -> Result<()> {
    let scenario = parse_scenario(failed)?;
    let sim = model_config(cli, model)?;
    let gait = to_assignment(gait_index, scenario)?;
    let traj = simulate(&gait, scenario, &sim)?;

    let mut out = ArtifactWriter::new(&cli.out_dir)?;
    let path = out.write(
        &trajectory_file_name(scenario, gait_index),
        &trajectory_csv(&traj),
    )?;
    out.commit();
    let end = traj.final_pose();
    println!(
        "failed={} gait={} order={} self_rotation={} F={:.6} displacement={:.6} final=({:.6},{:.6}) stable_fraction={:.4}",
        scenario,
        gait_index,
        gait.to_permutation(),
        sim.self_rotation,
        deviation(&traj, sim.params.theta),
        traj.displacement(),
        end.x,
        end.y,
        traj.stable_fraction()
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_enumerate(cli: &Cli, failed: &str, model: &ModelArgs) -> Result<()> {
    let scenarios = parse_scenarios(failed)?;
    let sim = model_config(cli, model)?;
    let mut out = ArtifactWriter::new(&cli.out_dir)?;
    for scenario in scenarios {
        let report = run_enumeration(scenario, &sim)?;
        for (entry, traj) in report.entries.iter().zip(&report.trajectories) {
            out.write(&entry.trajectory_file, &trajectory_csv(traj))?;
        }
        let label = scenario.label();
        let series: Vec<(String, _)> = report
            .trajectories
            .iter()
            .map(|t| (String::new(), t))
            .collect();
        let title = format!(
            "All gaits, failed {label}, self-rotation {}",
            if sim.self_rotation { "on" } else { "off" }
        );
        out.write(
            &format!("trajectories_{label}.svg"),
            &trajectory_svg(&title, &series),
        )?;
        out.write_json(&format!("enumeration_{label}.json"), &report)?;
        println!(
            "{label}: {} gaits, best #{} F={:.6}, median F={:.6}, worst F={:.6}",
            report.space_size, report.argmin, report.min_f, report.median_f, report.max_f
        );
    }
    let files = out.commit();
    println!("wrote {} files to {}", files.len(), cli.out_dir.display());
    Ok(())
}

struct OptimizeArgs<'a> {
    algorithm: &'a str,
    failed: &'a str,
    runs: usize,
    budget: usize,
    population: usize,
    exhaustive_fallback: bool,
    model: &'a ModelArgs,
}

fn cmd_optimize(cli: &Cli, args: OptimizeArgs) -> Result<()> {
    let algorithms = parse_algorithms(args.algorithm)?;
    let scenarios = parse_scenarios(args.failed)?;
    let sim = model_config(cli, args.model)?;
    let template = OptimizerConfig {
        population: args.population,
        budget: args.budget,
        exhaustive_fallback: args.exhaustive_fallback,
        ..OptimizerConfig::default()
    };
    for &scenario in &scenarios {
        for &algorithm in &algorithms {
            OptimizerConfig {
                algorithm,
                ..template
            }
            .validate(reduced_space(scenario).1)?;
        }
    }
    if args.runs == 0 {
        bail!("--runs must be positive");
    }
    let study = StudyConfig {
        runs: args.runs,
        master_seed: cli.seed,
        optimizer: template,
        sim,
    };
    let reports = run_convergence_study(&scenarios, &algorithms, &study)?;

    let mut out = ArtifactWriter::new(&cli.out_dir)?;
    for r in &reports {
        out.write_json(
            &format!("convergence_{}_{}.json", r.scenario, r.algorithm),
            r,
        )?;
    }
    out.write("convergence.csv", &convergence_csv(&reports))?;
    for (label, group) in by_scenario(&reports) {
        let title = format!("Mean best-so-far deviation, failed {label}");
        out.write(
            &format!("convergence_{label}.svg"),
            &convergence_svg(&title, &group),
        )?;
    }
    print_convergence(&reports);
    let files = out.commit();
    println!("wrote {} files to {}", files.len(), cli.out_dir.display());
    Ok(())
}

fn by_scenario(reports: &[ConvergenceReport]) -> BTreeMap<String, Vec<ConvergenceReport>> {
    let mut groups: BTreeMap<String, Vec<ConvergenceReport>> = BTreeMap::new();
    for r in reports {
        groups
            .entry(r.scenario.clone())
            .or_default()
            .push(r.clone());
    }
    groups
}

fn print_convergence(reports: &[ConvergenceReport]) {
    println!(
        "scenario algorithm runs oracle_F     mean_final_F regret@20   regret@end  oracle_hits"
    );
    for r in reports {
        let regret = regret_summary(r);
        let at = |e: usize| {
            regret
                .get(e.min(regret.len()) - 1)
                .copied()
                .unwrap_or(f64::NAN)
        };
        println!(
            "{:<8} {:<9} {:>4} {:<12.6e} {:<12.6e} {:<11.3e} {:<11.3e} {}/{}",
            r.scenario,
            r.algorithm.name(),
            r.runs.len(),
            r.oracle_f,
            r.mean_curve.last().copied().unwrap_or(f64::NAN),
            at(20),
            at(regret.len()),
            r.oracle_hits(1e-12),
            r.runs.len()
        );
    }
}

fn cmd_report(cli: &Cli, input: &Path) -> Result<()> {
    let mut names: Vec<String> = fs::read_dir(input)
        .with_context(|| format!("reading {}", input.display()))?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();

    let mut convergence = Vec::new();
    let mut enumerations = 0;
    for name in &names {
        let path = input.join(name);
        if name.starts_with("convergence_") {
            convergence.push(
                read_json::<ConvergenceReport>(&path)
                    .with_context(|| format!("parsing {}", path.display()))?,
            );
        } else if name.starts_with("enumeration_") {
            let e: EnumerationReport =
                read_json(&path).with_context(|| format!("parsing {}", path.display()))?;
            println!(
                "{}: {} gaits, self_rotation={}, best #{} F={:.6}, median F={:.6}, worst F={:.6}",
                e.scenario, e.space_size, e.self_rotation, e.argmin, e.min_f, e.median_f, e.max_f
            );
            enumerations += 1;
        }
    }
    if convergence.is_empty() && enumerations == 0 {
        bail!(
            "no enumeration_*.json or convergence_*.json reports in {}",
            input.display()
        );
    }
    if !convergence.is_empty() {
        print_convergence(&convergence);
        let mut out = ArtifactWriter::new(&cli.out_dir)?;
        for (label, group) in by_scenario(&convergence) {
            let title = format!("Mean best-so-far deviation, failed {label}");
            out.write(
                &format!("report_convergence_{label}.svg"),
                &convergence_svg(&title, &group),
            )?;
        }
        out.commit();
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Rank { legs, failed } => cmd_rank(legs, failed.as_deref()),
        Command::Unrank { index, failed } => cmd_unrank(*index, failed),
        Command::Simulate {
            failed,
            gait_index,
            model,
        } => cmd_simulate(cli, failed, *gait_index, model),
        Command::Enumerate { failed, model } => cmd_enumerate(cli, failed, model),
        Command::Optimize {
            algorithm,
            failed,
            runs,
            budget,
            population,
            exhaustive_fallback,
            model,
        } => cmd_optimize(
            cli,
            OptimizeArgs {
                algorithm,
                failed,
                runs: *runs,
                budget: *budget,
                population: *population,
                exhaustive_fallback: *exhaustive_fallback,
                model,
            },
        ),
        Command::Report { input } => cmd_report(cli, input),
    }
}
