use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use super::{episode_rng, mean_ci95, run_episode, Config, EpisodeRecord};
use crate::error::HarnessError;
use crate::policies::PolicyKind;
use crate::scene::Scene;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    pub episodes: usize,
    pub mean_opt: f64,
    pub ci95: f64,
    pub mean_transports: f64,
    pub mean_moves: f64,
    pub completion_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config_hash: String,
    pub base_seed: u64,
    pub garments: usize,
    pub summaries: Vec<PolicySummary>,
    /// Grouped by policy in config order, seeds ascending within a group.
    pub episodes: Vec<EpisodeRecord>,
}

impl BenchReport {
    pub fn summary(&self, kind: PolicyKind) -> Option<&PolicySummary> {
        self.summaries.iter().find(|s| s.policy == kind)
    }
}

fn summarize(kind: PolicyKind, records: &[EpisodeRecord]) -> Result<PolicySummary, HarnessError> {
    let n = records.len();
    let opts: Vec<f64> = records.iter().map(|r| r.opt).collect();
    let (mean_opt, ci95) = if n >= 2 { mean_ci95(&opts)? } else { (opts.first().copied().unwrap_or(0.0), 0.0) };
    let mean = |f: fn(&EpisodeRecord) -> f64| records.iter().map(f).sum::<f64>() / n.max(1) as f64;
    Ok(PolicySummary {
        policy: kind,
        episodes: n,
        mean_opt,
        ci95,
        mean_transports: mean(|r| r.transports as f64),
        mean_moves: mean(|r| r.workspace_moves as f64),
        completion_rate: mean(|r| if r.completed { 1.0 } else { 0.0 }),
    })
}

/// Runs every configured policy on the same seeded scenes.
pub fn bench(cfg: &Config) -> Result<BenchReport, HarnessError> {
    cfg.validate()?;
    let b = &cfg.bench;
    if b.episodes == 0 || b.policies.is_empty() {
        return Err(HarnessError::Config("bench needs at least one episode and one policy".into()));
    }
    let seeds: Vec<u64> = (0..b.episodes as u64).map(|i| b.base_seed.wrapping_add(i)).collect();
    let planner = cfg.planner();
    let max_steps = b.max_steps_per_garment * b.garments;
    let work = || -> Result<Vec<EpisodeRecord>, HarnessError> {
        let scenes: Vec<Scene> = seeds.par_iter().map(|&s| cfg.scene(s)).collect::<Result<_, _>>()?;
        let jobs: Vec<(PolicyKind, usize)> =
            b.policies.iter().flat_map(|&k| (0..scenes.len()).map(move |i| (k, i))).collect();
        jobs.par_iter()
            .map(|&(kind, i)| {
                let mut rng = episode_rng(seeds[i]);
                run_episode(&scenes[i], kind, &planner, &cfg.sim, &mut rng, max_steps)
            })
            .collect()
    };
    let episodes = if b.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(b.workers)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(work)?
    } else {
        work()?
    };
    let summaries = b
        .policies
        .iter()
        .map(|&k| {
            let recs: Vec<EpisodeRecord> = episodes.iter().filter(|r| r.policy == k).cloned().collect();
            summarize(k, &recs)
        })
        .collect::<Result<_, _>>()?;
    Ok(BenchReport { config_hash: cfg.hash(), base_seed: b.base_seed, garments: b.garments, summaries, episodes })
}

/// Human-readable summary table.
pub fn format_report(r: &BenchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "config_hash {}", r.config_hash);
    let _ = writeln!(s, "base_seed {}", r.base_seed);
    let _ = writeln!(s, "garments {}", r.garments);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<14} {:>8} {:>9} {:>9} {:>11} {:>8} {:>11}",
        "policy", "episodes", "opt_mean", "opt_ci95", "transports", "moves", "completion"
    );
    for p in &r.summaries {
        let _ = writeln!(
            s,
            "{:<14} {:>8} {:>9.4} {:>9.4} {:>11.3} {:>8.3} {:>11.3}",
            p.policy.name(),
            p.episodes,
            p.mean_opt,
            p.ci95,
            p.mean_transports,
            p.mean_moves,
            p.completion_rate
        );
    }
    s
}

/// One row per episode.
pub fn episodes_csv(r: &BenchReport) -> String {
    let mut s = String::from("seed,policy,transports,moves,removed,opt,completed\n");
    for e in &r.episodes {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.6},{}",
            e.seed, e.policy, e.transports, e.workspace_moves, e.objects_removed, e.opt, e.completed
        );
    }
    s
}

/// Writes `report.txt` and `episodes.csv` into `dir`.
pub fn save_report(r: &BenchReport, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.txt"), format_report(r))?;
    std::fs::write(dir.join("episodes.csv"), episodes_csv(r))?;
    Ok(())
}
