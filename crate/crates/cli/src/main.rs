//! Command-line front end: scene generation, instance solving, single
//! episodes, benchmarks and the planning-time sweep.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

use declutter_core::harness::{
    bench, calibration_run, episode_rng, format_report, run_episode, save_report, save_scaling, scaling_bench,
    scaling_csv, Config,
};
use declutter_core::policies::PolicyKind;
use declutter_core::scene::{load_scene, save_scene};
use declutter_core::setcover::io::{format_outcome, parse_instance};
use declutter_core::setcover::{plan_failure_prob, solve, SolverConfig, Strategy};

#[derive(Parser)]
#[command(name = "declutter", version, about = "Multi-garment grasp planning and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a randomly reset scene to a file.
    Generate {
        #[arg(long)]
        garments: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Solve a set-cover instance file and print the plan.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "exact")]
        strategy: Strategy,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        node_budget: Option<u64>,
    },
    /// Play one episode and print its step log.
    Run {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        policy: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the episode record as JSON.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Run the configured benchmark and write report.txt and episodes.csv.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time one planning cycle on separated scenes of growing size.
    Scaling {
        #[arg(long, default_value_t = 5)]
        min: usize,
        #[arg(long, default_value_t = 35)]
        max: usize,
        #[arg(long, default_value_t = 5)]
        step: usize,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute whole segment-cycle plans and report how often planned
    /// garments are lifted.
    Calibrate {
        #[arg(long, default_value_t = 1000)]
        cycles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Generate { garments, seed, out, config } => {
            let mut cfg = load_config(&config)?;
            cfg.bench.garments = garments;
            cfg.validate()?;
            let scene = cfg.scene(seed)?;
            save_scene(&scene, &out).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} garments to {}", scene.len(), out.display());
        }
        Command::Solve { instance, strategy, budget, node_budget } => {
            let text = std::fs::read_to_string(&instance).with_context(|| format!("reading {}", instance.display()))?;
            let file = parse_instance(&text).with_context(|| format!("parsing {}", instance.display()))?;
            let inst = file.to_milp()?;
            let mut cfg = SolverConfig { q: file.q, time_budget: budget, strategy, ..SolverConfig::default() };
            if let Some(n) = node_budget {
                cfg.node_budget = n;
            }
            let out = solve(&inst, &cfg);
            print!("{}", format_outcome(&out, &plan_failure_prob(&out.plan, &file.p)));
        }
        Command::Run { scene, policy, seed, max_steps, config, record } => {
            let cfg = load_config(&config)?;
            let kind: PolicyKind = policy.parse()?;
            let scene = load_scene(&scene)?;
            if scene.is_empty() {
                bail!("scene {} has no garments", scene.rng_seed);
            }
            let max_steps = max_steps.unwrap_or(cfg.bench.max_steps_per_garment * scene.len());
            let rec = run_episode(&scene, kind, &cfg.planner(), &cfg.sim, &mut episode_rng(seed), max_steps)?;
            for (k, s) in rec.steps.iter().enumerate() {
                let removed: Vec<String> = s.removed.iter().map(u32::to_string).collect();
                println!(
                    "{k:>4} {:<32} held {} removed [{}] stale {}",
                    s.action.to_string(),
                    s.held_after,
                    removed.join(" "),
                    s.stale_skips
                );
            }
            println!(
                "policy {} transports {} moves {} removed {}/{} opt {:.4} completed {}",
                rec.policy, rec.transports, rec.workspace_moves, rec.objects_removed, rec.initial_garments, rec.opt, rec.completed
            );
            if let Some(path) = record {
                std::fs::write(&path, serde_json::to_string_pretty(&rec)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Bench { config, out } => {
            let cfg = load_config(&config)?;
            let report = bench(&cfg)?;
            save_report(&report, &out)?;
            print!("{}", format_report(&report));
        }
        Command::Scaling { min, max, step, repeats, seed, config, out } => {
            if step == 0 || min == 0 || min > max {
                bail!("need 0 < min <= max and step > 0");
            }
            let cfg = load_config(&config)?;
            let sizes: Vec<usize> = (min..=max).step_by(step).collect();
            let rows = scaling_bench(&cfg, &sizes, repeats, seed)?;
            save_scaling(&rows, &out)?;
            print!("{}", scaling_csv(&rows));
        }
        Command::Calibrate { cycles, seed, config } => {
            let cfg = load_config(&config)?;
            let st = calibration_run(&cfg, cycles, seed)?;
            println!(
                "cycles {} planned {} removed {} frequency {:.4} max_failure {:.6} relaxed_cycles {}",
                st.cycles,
                st.planned_segments,
                st.removed_segments,
                st.removal_frequency(),
                st.max_planned_failure,
                st.relaxed_cycles
            );
        }
    }
    Ok(())
}
