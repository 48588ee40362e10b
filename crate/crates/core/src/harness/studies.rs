//! Planner-only studies: the planning-time sweep over scene size and the
//! check that executed plans deliver the removal probability they promise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use super::{episode_rng, Config};
use crate::error::{HarnessError, SceneError};
use crate::policies::{segment_cycle, BasketOrder};
use crate::scene::{apply_grasp, garment_library, generate_separated_scene, observe, observe_with_truth, LibrarySpec};
use crate::setcover::SolveStatus;

/// Rejection-sampling attempts per garment for separated scenes.
pub const PLACEMENT_ATTEMPTS: usize = 10_000;

/// Solver budget for the sweep when the config leaves it unset, seconds.
const SWEEP_TIME_BUDGET: f64 = 60.0;

/// Medians over the repeats of one sweep size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n_garments: usize,
    pub n_segments: f64,
    /// Seconds.
    pub candidate_gen_time: f64,
    /// Seconds.
    pub milp_solve_time: f64,
    pub plan_size: f64,
    /// Repeats whose solve did not prove optimality.
    pub non_optimal: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// One planning cycle on separated scenes of each size in `n_list`. Repeat
/// `r` draws its library and placements from seed `seed + r`; smaller scenes
/// use a prefix of the same library.
pub fn scaling_bench(cfg: &Config, n_list: &[usize], repeats: usize, seed: u64) -> Result<Vec<ScalingRow>, HarnessError> {
    if n_list.is_empty() || n_list.contains(&0) || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Precondition("sizes must be positive and strictly ascending".into()));
    }
    if repeats == 0 {
        return Err(HarnessError::Precondition("at least one repeat is needed".into()));
    }
    let max_n = *n_list.last().expect("non-empty");
    let mut planner = cfg.planner();
    planner.solver.time_budget.get_or_insert(SWEEP_TIME_BUDGET);
    let mut samples: Vec<Vec<(f64, f64, f64, f64, bool)>> = vec![Vec::new(); n_list.len()];
    for rep in 0..repeats as u64 {
        let library = garment_library(&LibrarySpec::scaling(max_n, seed.wrapping_add(rep)));
        for (k, &n) in n_list.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep));
            rng.set_stream(n as u64);
            let scene = match generate_separated_scene(&library[..n], &cfg.sim, PLACEMENT_ATTEMPTS, &mut rng) {
                Err(SceneError::PlacementFailed(_)) => return Err(SceneError::PlacementFailed(n).into()),
                other => other?,
            };
            let obs = observe(&scene, cfg.sim.min_visible);
            let plan = segment_cycle(&obs, &planner, BasketOrder::NearestFirst, &mut rng).map_err(SceneError::from)?;
            let optimal = plan.outcome.status == SolveStatus::Optimal;
            if !optimal {
                log::warn!(
                    "n = {n}, repeat {rep}: solver returned {} with a plan of {} grasps after {} nodes",
                    plan.outcome.status,
                    plan.grasps.len(),
                    plan.outcome.nodes_explored
                );
            }
            samples[k].push((
                obs.segments.len() as f64,
                plan.timings.candidates,
                plan.timings.milp,
                plan.grasps.len() as f64,
                optimal,
            ));
        }
    }
    Ok(n_list
        .iter()
        .zip(samples)
        .map(|(&n, s)| ScalingRow {
            n_garments: n,
            n_segments: median(s.iter().map(|x| x.0).collect()),
            candidate_gen_time: median(s.iter().map(|x| x.1).collect()),
            milp_solve_time: median(s.iter().map(|x| x.2).collect()),
            plan_size: median(s.iter().map(|x| x.3).collect()),
            non_optimal: s.iter().filter(|x| !x.4).count(),
        })
        .collect())
}

pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut s = String::from("n_garments,n_segments,candidate_gen_time,milp_solve_time,plan_size,non_optimal\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.1},{:.6},{:.6},{:.1},{}",
            r.n_garments, r.n_segments, r.candidate_gen_time, r.milp_solve_time, r.plan_size, r.non_optimal
        );
    }
    s
}

pub fn save_scaling(rows: &[ScalingRow], path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, scaling_csv(rows))?;
    Ok(())
}

/// Outcome of executing whole segment-cycle plans.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStats {
    pub cycles: usize,
    /// Segments whose constraint a plan honoured, summed over cycles.
    pub planned_segments: usize,
    /// Of those, the ones whose garment was lifted by some grasp of the plan.
    pub removed_segments: usize,
    /// Largest planned failure probability over honoured segments.
    pub max_planned_failure: f64,
    /// Cycles that dropped at least one segment's constraint.
    pub relaxed_cycles: usize,
}

impl CalibrationStats {
    pub fn removal_frequency(&self) -> f64 {
        if self.planned_segments == 0 {
            return 0.0;
        }
        self.removed_segments as f64 / self.planned_segments as f64
    }
}

/// Plans one cycle on each of `cycles` bench scenes (seeds `seed..`) and
/// executes every planned grasp in order.
pub fn calibration_run(cfg: &Config, cycles: usize, seed: u64) -> Result<CalibrationStats, HarnessError> {
    cfg.validate()?;
    let planner = cfg.planner();
    let per_cycle: Vec<CalibrationStats> = (0..cycles as u64)
        .into_par_iter()
        .map(|c| {
            let s = seed.wrapping_add(c);
            let scene = cfg.scene(s)?;
            let (obs, truth) = observe_with_truth(&scene, cfg.sim.min_visible);
            let mut rng = episode_rng(s);
            let plan = segment_cycle(&obs, &planner, BasketOrder::NearestFirst, &mut rng).map_err(SceneError::from)?;
            let mut world = scene;
            let mut lifted = Vec::new();
            for g in &plan.grasps {
                let (next, held) = apply_grasp(&world, &g.grasp, &planner.gripper, &planner.predictor, &mut rng);
                world = next;
                lifted.extend(held.into_iter().map(|h| h.id));
            }
            let mut st = CalibrationStats { cycles: 1, ..Default::default() };
            for (j, &seg) in plan.segment_ids.iter().enumerate() {
                if plan.outcome.dropped_garments.binary_search(&j).is_ok() {
                    continue;
                }
                st.planned_segments += 1;
                st.max_planned_failure = st.max_planned_failure.max(plan.failure[j]);
                let id = truth.garment(seg).expect("segment ids index the truth link");
                if lifted.contains(&id) {
                    st.removed_segments += 1;
                }
            }
            st.relaxed_cycles = usize::from(!plan.outcome.dropped_garments.is_empty());
            Ok(st)
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(per_cycle.into_iter().fold(CalibrationStats::default(), |a, b| CalibrationStats {
        cycles: a.cycles + b.cycles,
        planned_segments: a.planned_segments + b.planned_segments,
        removed_segments: a.removed_segments + b.removed_segments,
        max_planned_failure: a.max_planned_failure.max(b.max_planned_failure),
        relaxed_cycles: a.relaxed_cycles + b.relaxed_cycles,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_rejects_bad_sizes() {
        let cfg = Config::default();
        assert!(scaling_bench(&cfg, &[0, 5], 1, 0).is_err());
        assert!(scaling_bench(&cfg, &[10, 5], 1, 0).is_err());
        assert!(scaling_bench(&cfg, &[], 1, 0).is_err());
    }

    #[test]
    fn small_sweep_runs() {
        let rows = scaling_bench(&Config::default(), &[2, 4], 1, 5).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].n_segments, 4.0);
        assert!(rows.iter().all(|r| r.milp_solve_time >= 0.0 && r.plan_size >= 1.0));
        assert_eq!(scaling_csv(&rows).lines().count(), 3);
    }

    #[test]
    fn impossible_placement_names_size() {
        let mut cfg = Config::default();
        cfg.sim.workspace_width = 0.2;
        cfg.sim.workspace_height = 0.2;
        match scaling_bench(&cfg, &[30], 1, 0) {
            Err(HarnessError::Scene(SceneError::PlacementFailed(30))) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn short_calibration_meets_target() {
        let st = calibration_run(&Config::default(), 20, 100).unwrap();
        assert_eq!(st.cycles, 20);
        assert!(st.max_planned_failure <= 0.3 + 1e-9);
        assert!(st.planned_segments > 0);
    }
}
