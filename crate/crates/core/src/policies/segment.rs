//! One planning cycle of the segment-based method, and the staleness test
//! used while executing it.

use rand::Rng;
use std::time::Instant;

use super::Planner;
use crate::candidates::{conflict_pairs, partition_foreground, sample_candidates};
use crate::error::RasterError;
use crate::predictor::{expected_area_from_row, prob_matrix, Grasp, ProbMatrix};
use crate::raster::{fill_holes, intersect, BitMask, CellWindow, Point, ScalarField};
use crate::scene::ObservedScene;
use crate::setcover::{build_milp, plan_failure_prob, solve, SolveOutcome};

/// Execution order of a cycle's grasps by distance to the basket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasketOrder {
    NearestFirst,
    FarthestFirst,
}

/// Heights around a planned grasp at planning time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    window: Option<CellWindow>,
    values: Vec<f64>,
}

impl Snapshot {
    /// `window` x `window` cells centered on the cell under `at`, clipped to
    /// the grid.
    pub fn capture(field: &ScalarField, at: Point, window: usize) -> Self {
        let meta = field.meta();
        let Some((c, r)) = meta.cell_of(at) else {
            return Self { window: None, values: Vec::new() };
        };
        let win = CellWindow { c0: c, r0: r, c1: c, r1: r }.expand(window / 2, meta);
        let mut values = Vec::with_capacity(win.width() * win.height());
        for row in win.r0..=win.r1 {
            for col in win.c0..=win.c1 {
                values.push(field.get(col, row));
            }
        }
        Self { window: Some(win), values }
    }
}

/// True when the mean squared height change over the snapshot window
/// exceeds `tol`.
pub fn staleness_check(current: &ScalarField, snapshot: &Snapshot, tol: f64) -> bool {
    let Some(win) = snapshot.window else {
        return false;
    };
    let mut sum = 0.0;
    let mut k = 0;
    for row in win.r0..=win.r1 {
        for col in win.c0..=win.c1 {
            let d = current.get(col, row) - snapshot.values[k];
            sum += d * d;
            k += 1;
        }
    }
    sum / k as f64 > tol
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannedGrasp {
    pub grasp: Grasp,
    pub partition_id: usize,
    /// Expected lifted area in cells, `sum_j p_ij * area(M_j)`.
    pub expected_area: f64,
    pub snapshot: Snapshot,
}

/// Seconds spent in each planning stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CycleTimings {
    /// Cleanup, partitioning, sampling and probability table.
    pub candidates: f64,
    /// Program construction and solve.
    pub milp: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CyclePlan {
    /// In execution order.
    pub grasps: Vec<PlannedGrasp>,
    pub outcome: SolveOutcome,
    /// Observation segment id behind each program column.
    pub segment_ids: Vec<usize>,
    /// Planned failure probability per program column.
    pub failure: Vec<f64>,
    pub candidate_count: usize,
    pub timings: CycleTimings,
}

impl CyclePlan {
    fn empty() -> Self {
        Self {
            grasps: Vec::new(),
            outcome: SolveOutcome {
                plan: Default::default(),
                status: crate::setcover::SolveStatus::Optimal,
                dropped_garments: Vec::new(),
                nodes_explored: 0,
                wall_time: 0.0,
            },
            segment_ids: Vec::new(),
            failure: Vec::new(),
            candidate_count: 0,
            timings: CycleTimings::default(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.grasps.is_empty()
    }

    /// Observation segment ids whose constraint the plan honours.
    pub fn covered_segments(&self) -> Vec<usize> {
        (0..self.segment_ids.len())
            .filter(|j| self.outcome.dropped_garments.binary_search(j).is_err())
            .map(|j| self.segment_ids[j])
            .collect()
    }
}

/// The covering program a cycle solves, before solving.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleTable {
    pub grasps: Vec<Grasp>,
    pub partition_ids: Vec<usize>,
    pub p: ProbMatrix,
    pub conflicts: Vec<(usize, usize)>,
    /// Cleaned segment behind each column, with its observation id.
    pub segments: Vec<BitMask>,
    pub segment_ids: Vec<usize>,
}

/// Cleanup, partitioning, sampling and the success table.
pub fn cycle_table<R: Rng + ?Sized>(obs: &ObservedScene, planner: &Planner, rng: &mut R) -> Result<CycleTable, RasterError> {
    let meta = *obs.meta();
    let mut segments = Vec::with_capacity(obs.segments.len());
    let mut segment_ids = Vec::with_capacity(obs.segments.len());
    for s in &obs.segments {
        let cleaned = intersect(&fill_holes(&s.mask, planner.policy.fill_kernel)?, &obs.foreground)?;
        if !cleaned.is_empty() {
            segments.push(cleaned);
            segment_ids.push(s.id);
        }
    }
    let parts = partition_foreground(&obs.foreground, &segments, planner.candidates.r)?;
    let cands = sample_candidates(&parts, &planner.candidates, &meta, rng);
    let grasps: Vec<Grasp> = cands.iter().map(|c| c.grasp).collect();
    let p = prob_matrix(&grasps, &segments, &meta, &planner.gripper, &planner.predictor);
    Ok(CycleTable {
        grasps,
        partition_ids: cands.iter().map(|c| c.partition_id).collect(),
        p,
        conflicts: conflict_pairs(&cands),
        segments,
        segment_ids,
    })
}

/// Cleans the segments, builds candidates and their success table, solves
/// the covering program and orders the chosen grasps.
pub fn segment_cycle<R: Rng + ?Sized>(
    obs: &ObservedScene,
    planner: &Planner,
    order: BasketOrder,
    rng: &mut R,
) -> Result<CyclePlan, RasterError> {
    if obs.segments.is_empty() {
        return Ok(CyclePlan::empty());
    }
    let t0 = Instant::now();
    let table = cycle_table(obs, planner, rng)?;
    let t1 = Instant::now();
    let inst = build_milp(&table.p, planner.solver.q, &table.conflicts)
        .expect("success probabilities stay below one and q is validated");
    let outcome = solve(&inst, &planner.solver);
    let t2 = Instant::now();

    let areas: Vec<usize> = table.segments.iter().map(BitMask::area_pixels).collect();
    let dist = |i: usize| table.grasps[i].point().distance(planner.basket);
    let mut chosen = outcome.plan.selected.clone();
    chosen.sort_by(|&a, &b| {
        let by_dist = match order {
            BasketOrder::NearestFirst => dist(a).total_cmp(&dist(b)),
            BasketOrder::FarthestFirst => dist(b).total_cmp(&dist(a)),
        };
        by_dist.then(a.cmp(&b))
    });
    let grasps = chosen
        .into_iter()
        .map(|i| PlannedGrasp {
            grasp: table.grasps[i],
            partition_id: table.partition_ids[i],
            expected_area: expected_area_from_row(table.p.row(i), &areas),
            snapshot: Snapshot::capture(&obs.heights, table.grasps[i].point(), planner.policy.staleness_window),
        })
        .collect();
    Ok(CyclePlan {
        grasps,
        failure: plan_failure_prob(&outcome.plan, &table.p),
        outcome,
        segment_ids: table.segment_ids,
        candidate_count: table.grasps.len(),
        timings: CycleTimings {
            candidates: (t1 - t0).as_secs_f64(),
            milp: (t2 - t1).as_secs_f64(),
        },
    })
}
