//! `gridforge` command-line front end.
//!
//! Exit status: 0 on success, 1 when the grid or plan is infeasible, 2 on
//! bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use gridforge::economics::Concept;
use gridforge::exec::Exec;
use gridforge::grid::{load_grid, save_grid, validate_grid, Grid, ScenarioName};
use gridforge::pipeline::{compare, plan_concepts, run_area, write_outputs, TopologyOutcome};
use gridforge::planner::{candidate_trails, dismantle};
use gridforge::power_flow::{check_contingency_operation, check_normal_operation, run_power_flow};
use gridforge::principles::Principles;
use gridforge::reliability::fmea;
use gridforge::topology::{check_contingency_supply, check_radiality, check_supply, RadialityMode};

#[derive(Parser)]
#[command(name = "gridforge", version, about = "Target-grid planning for medium-voltage distribution grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check integrity, topology and operating limits of a grid.
    Validate {
        grid: PathBuf,
        #[arg(long)]
        principles: Option<PathBuf>,
        /// Allow feeders to be meshed with each other.
        #[arg(long)]
        meshed: bool,
    },
    /// Run an AC power flow.
    Pf {
        grid: PathBuf,
        #[arg(long, default_value = "peak_load")]
        scenario: ScenarioName,
        #[arg(long)]
        principles: Option<PathBuf>,
    },
    /// Expected outage times and energies for single line faults.
    Fmea {
        grid: PathBuf,
        #[arg(long)]
        principles: Option<PathBuf>,
    },
    /// Remove long lines (and optionally the switching station) and list new trails.
    Dismantle {
        grid: PathBuf,
        #[arg(long)]
        remove_station: bool,
        #[arg(long)]
        principles: Option<PathBuf>,
        /// Write the dismantled grid here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan one concept and print its reference plan.
    Plan {
        grid: PathBuf,
        #[arg(long)]
        principles: Option<PathBuf>,
        #[arg(long)]
        concept: Concept,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Plan all concepts, write per-topology plans and the comparison.
    Compare {
        grid: PathBuf,
        #[arg(long)]
        principles: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunOpts,
    },
}

#[derive(clap::Args)]
struct RunOpts {
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Number of topologies per dismantling variant.
    #[arg(long)]
    topologies: Option<usize>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

enum Failure {
    Input(anyhow::Error),
    Infeasible(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn principles(path: Option<&Path>) -> anyhow::Result<Principles> {
    let p = match path {
        Some(p) => Principles::load(p).with_context(|| format!("reading principles {}", p.display()))?,
        None => Principles::default(),
    };
    Ok(p.with_env_seed())
}

fn grid(path: &Path) -> anyhow::Result<Grid> {
    load_grid(path).with_context(|| format!("reading grid {}", path.display()))
}

fn print(v: &serde_json::Value) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn apply_run_opts(p: &mut Principles, run: &RunOpts) {
    if let Some(j) = run.jobs {
        p.planner_params.jobs = j;
    }
    if let Some(n) = run.topologies {
        p.planner_params.n_topologies = n.max(1);
    }
    if run.sequential {
        p.planner_params.exec = Exec::Sequential;
    }
}

fn validate(path: &Path, pr: Option<&Path>, meshed: bool) -> Outcome {
    let pr = principles(pr)?;
    let g = grid(path)?;
    let faults = validate_grid(&g);
    if !faults.is_empty() {
        print(&json!({ "faults": faults }))?;
        return Err(Failure::Input(anyhow::anyhow!("{} integrity fault(s)", faults.len())));
    }
    let mode = if meshed { RadialityMode::MeshedFeeders } else { RadialityMode::Strict };
    let unsupplied = check_supply(&g)?;
    let no_backup = check_contingency_supply(&g)?;
    let radiality = check_radiality(&g, mode)?;
    let normal = check_normal_operation(&g, &pr.worst_cases())?;
    let contingency = check_contingency_operation(&g, &pr.peak_load())?;
    let count = unsupplied.len() + no_backup.len() + radiality.len() + normal.len() + contingency.len();
    print(&json!({
        "unsupplied": unsupplied,
        "no_backup": no_backup,
        "radiality": radiality,
        "normal_operation": normal.entries,
        "contingency_operation": contingency.entries,
        "violations": count,
    }))?;
    if count > 0 {
        return Err(Failure::Infeasible(format!("{count} violation(s)")));
    }
    Ok(())
}

fn reference(outcomes: &[TopologyOutcome]) -> Option<&TopologyOutcome> {
    outcomes
        .iter()
        .filter_map(|o| o.feasible_cost().map(|c| (c, o)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.topology.cmp(&b.1.topology)))
        .map(|(_, o)| o)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { grid: g, principles: p, meshed } => validate(&g, p.as_deref(), meshed),
        Command::Pf { grid: g, scenario, principles: p } => {
            let pr = principles(p.as_deref())?;
            let r = run_power_flow(&grid(&g)?, &pr.scenario(scenario))?;
            print(&serde_json::to_value(&r)?)?;
            if !r.converged {
                return Err(Failure::Infeasible(format!("no convergence after {} iterations", r.iterations)));
            }
            Ok(())
        }
        Command::Fmea { grid: g, principles: p } => {
            let pr = principles(p.as_deref())?;
            let r = fmea(&grid(&g)?, &pr.reliability_params)?;
            print(&serde_json::to_value(&r)?)?;
            Ok(())
        }
        Command::Dismantle { grid: g, remove_station, principles: p, out } => {
            let pr = principles(p.as_deref())?;
            let pp = &pr.planner_params;
            let d = dismantle(&grid(&g)?, pp.dismantle_threshold, remove_station)?;
            let trails = candidate_trails(&d, pp.trail_factor, &pp.trail_line_type);
            match out {
                Some(path) => {
                    save_grid(&d, &path)?;
                    print(&json!({ "affected_buses": d.meta.affected_buses, "candidate_trails": trails }))?;
                }
                None => print(&json!({ "grid": d, "candidate_trails": trails }))?,
            }
            Ok(())
        }
        Command::Plan { grid: g, principles: p, concept, run } => {
            let mut pr = principles(p.as_deref())?;
            apply_run_opts(&mut pr, &run);
            let g = grid(&g)?;
            let plans = plan_concepts(&g, &pr, &[concept])?;
            let outcomes = plans.get(&concept).map(Vec::as_slice).unwrap_or_default();
            let report = compare(&g.meta.name, pr.planner_params.seed, &plans);
            let best = reference(outcomes);
            print(&json!({
                "concept": concept,
                "costs": report.concepts.get(&concept).map(|s| &s.costs),
                "reference": best,
            }))?;
            if best.is_none() {
                return Err(Failure::Infeasible(format!("no feasible {concept} plan")));
            }
            Ok(())
        }
        Command::Compare { grid: g, principles: p, out, run } => {
            let mut pr = principles(p.as_deref())?;
            apply_run_opts(&mut pr, &run);
            let result = run_area(&grid(&g)?, &pr)?;
            let dir = write_outputs(&result, &out).with_context(|| format!("writing {}", out.display()))?;
            log::info!("reports written to {}", dir.display());
            print(&serde_json::to_value(&result.report)?)?;
            if result.report.winner.is_none() {
                return Err(Failure::Infeasible("no concept has a feasible plan".into()));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
