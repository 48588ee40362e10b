//! Decluttering policies.
//!
//! Pure planners map an [`ObservedScene`] to grasps; an [`Agent`] wraps one
//! policy with the execution state it needs between actions (the remaining
//! grasps of a cycle, a pending transport, the running area of a
//! consolidation chain) and sees the world only through a [`Camera`].

mod depth;
mod segment;

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

pub use depth::{disc_sums, max_height_policy, max_volume_policy, random_policy};
pub use segment::{
    cycle_table, segment_cycle, staleness_check, BasketOrder, CyclePlan, CycleTable, CycleTimings, PlannedGrasp,
    Snapshot,
};

use crate::candidates::CandidateConfig;
use crate::error::{HarnessError, RasterError};
use crate::predictor::{Grasp, GripperSpec, PredictorConfig};
use crate::raster::{Point, ScalarField};
use crate::scene::{height_field, observe, ObservedScene, Scene};
use crate::setcover::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Action {
    Pick { grasp: Grasp },
    PlaceInWorkspace { place: Point },
    Transport,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pick { grasp: g } => write!(f, "pick {:.4} {:.4} {:.4}", g.x, g.y, g.theta),
            Self::PlaceInWorkspace { place: p } => write!(f, "place {:.4} {:.4}", p.x, p.y),
            Self::Transport => f.write_str("transport"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthVariant {
    #[default]
    Height,
    Volume,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyConfig {
    /// Piles taller than this (meters) send the hybrids to their depth branch.
    pub height_threshold: f64,
    /// Disc radius of the volume heuristic, meters.
    pub volume_radius: f64,
    /// Neighbourhood radius for the depth grasp orientation, meters.
    pub pca_radius: f64,
    /// Expected lifted area above which a consolidation chain is sent to
    /// the basket, in cells at the reference resolution.
    pub grasp_area_threshold: f64,
    /// Side of the square staleness window, cells; odd.
    pub staleness_window: usize,
    /// Mean squared height change (square meters) that marks a grasp stale.
    pub staleness_tol: f64,
    pub depth_variant: DepthVariant,
    /// Majority-filter size for segment cleanup; odd.
    pub fill_kernel: usize,
}

/// Consolidation threshold in cells at the reference resolution, 0.1 m^2 of
/// segment area.
pub const DEFAULT_GRASP_AREA_THRESHOLD: f64 = 25_000.0;

impl Default for PolicyConfig {
    fn default() -> Self {
        let g = GripperSpec::default();
        Self {
            height_threshold: 0.1,
            volume_radius: g.d1 / 2.0,
            pca_radius: g.d1 / 2.0,
            grasp_area_threshold: DEFAULT_GRASP_AREA_THRESHOLD,
            staleness_window: 31,
            staleness_tol: 1e-5,
            depth_variant: DepthVariant::Height,
            fill_kernel: 3,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let positive = [self.height_threshold, self.volume_radius, self.pca_radius, self.grasp_area_threshold, self.staleness_tol];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(HarnessError::Config("policy thresholds and radii must be positive".into()));
        }
        if self.staleness_window % 2 == 0 || self.fill_kernel % 2 == 0 {
            return Err(HarnessError::Config("staleness_window and fill_kernel must be odd".into()));
        }
        Ok(())
    }

    /// The consolidation threshold in cells of the given size.
    pub fn area_threshold_cells(&self, cell_size: f64) -> f64 {
        let k = crate::DEFAULT_CELL_SIZE / cell_size;
        self.grasp_area_threshold * k * k
    }
}

/// Everything a planner is parameterized by.
#[derive(Clone, Debug, PartialEq)]
pub struct Planner {
    pub gripper: GripperSpec,
    pub predictor: PredictorConfig,
    pub candidates: CandidateConfig,
    pub solver: SolverConfig,
    pub policy: PolicyConfig,
    pub basket: Point,
}

impl Default for Planner {
    fn default() -> Self {
        Self {
            gripper: GripperSpec::default(),
            predictor: PredictorConfig::default(),
            candidates: CandidateConfig::default(),
            solver: SolverConfig::default(),
            policy: PolicyConfig::default(),
            basket: crate::scene::SimConfig::default().basket,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Random,
    MaxHeight,
    MaxVolume,
    Segment,
    HybridHeight,
    HybridVolume,
    Consolidation,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        Self::Random,
        Self::MaxHeight,
        Self::MaxVolume,
        Self::Segment,
        Self::HybridHeight,
        Self::HybridVolume,
        Self::Consolidation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::MaxHeight => "max-height",
            Self::MaxVolume => "max-volume",
            Self::Segment => "segment",
            Self::HybridHeight => "hybrid-height",
            Self::HybridVolume => "hybrid-volume",
            Self::Consolidation => "consolidation",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::UnknownPolicy(s.to_string()))
    }
}

/// Which branch the hybrid rule takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HybridBranch {
    Depth,
    Segment,
}

/// Depth branch exactly when some pile is strictly taller than `threshold`.
pub fn hybrid_dispatch(heights: &ScalarField, threshold: f64) -> HybridBranch {
    if heights.max() > threshold {
        HybridBranch::Depth
    } else {
        HybridBranch::Segment
    }
}

/// Result of one hybrid decision.
#[derive(Clone, Debug, PartialEq)]
pub enum HybridChoice {
    Depth(Grasp),
    Cycle(CyclePlan),
}

fn depth_grasp(obs: &ObservedScene, cfg: &PolicyConfig, variant: DepthVariant) -> Option<Grasp> {
    match variant {
        DepthVariant::Height => max_height_policy(obs, cfg.pca_radius),
        DepthVariant::Volume => max_volume_policy(obs, cfg.volume_radius, cfg.pca_radius),
    }
}

pub fn hybrid_policy<R: Rng + ?Sized>(obs: &ObservedScene, planner: &Planner, rng: &mut R) -> Result<Option<HybridChoice>, RasterError> {
    if obs.foreground.is_empty() {
        return Ok(None);
    }
    Ok(Some(match hybrid_dispatch(&obs.heights, planner.policy.height_threshold) {
        HybridBranch::Depth => {
            HybridChoice::Depth(depth_grasp(obs, &planner.policy, planner.policy.depth_variant).expect("foreground is non-empty"))
        }
        HybridBranch::Segment => HybridChoice::Cycle(segment_cycle(obs, planner, BasketOrder::NearestFirst, rng)?),
    }))
}

/// Tracks the expected area accumulated by a consolidation chain.
#[derive(Clone, Debug, Default, PartialEq)]
struct Chain {
    total: f64,
    open: bool,
}

/// How the next planned grasp joins the current chain.
enum Step {
    /// Start a new chain with this grasp.
    Start,
    /// Place the held pile at the grasp, then pick there.
    Extend,
    /// Send the current pile to the basket first.
    Close,
}

impl Chain {
    fn step(&mut self, expected_area: f64, threshold: f64) -> Step {
        if !self.open {
            self.open = true;
            self.total = expected_area;
            Step::Start
        } else if self.total + expected_area <= threshold {
            self.total += expected_area;
            Step::Extend
        } else {
            self.reset();
            Step::Close
        }
    }

    fn reset(&mut self) {
        self.open = false;
        self.total = 0.0;
    }
}

/// The consolidation action sequence for one cycle assuming every pick
/// lifts something: chained place-and-pick moves, closed by a transport
/// whenever the next grasp would push the expected area over the threshold.
pub fn consolidation_policy<R: Rng + ?Sized>(obs: &ObservedScene, planner: &Planner, rng: &mut R) -> Result<Vec<Action>, RasterError> {
    let plan = segment_cycle(obs, planner, BasketOrder::FarthestFirst, rng)?;
    Ok(consolidation_actions(&plan.grasps, planner.policy.area_threshold_cells(obs.meta().cell_size)))
}

/// Chains an ordered grasp list under an area threshold.
pub fn consolidation_actions(grasps: &[PlannedGrasp], threshold: f64) -> Vec<Action> {
    let mut out = Vec::new();
    let mut chain = Chain::default();
    let mut k = 0;
    while k < grasps.len() {
        let g = &grasps[k];
        match chain.step(g.expected_area, threshold) {
            Step::Start => out.push(Action::Pick { grasp: g.grasp }),
            Step::Extend => {
                out.push(Action::PlaceInWorkspace { place: g.grasp.point() });
                out.push(Action::Pick { grasp: g.grasp });
            }
            Step::Close => {
                out.push(Action::Transport);
                continue;
            }
        }
        k += 1;
    }
    if chain.open {
        out.push(Action::Transport);
    }
    out
}

/// The planner's view of the world: observations and the number of
/// garments currently in the gripper, nothing else.
pub struct Camera<'a> {
    scene: &'a Scene,
    min_visible: usize,
    holding: usize,
}

impl<'a> Camera<'a> {
    pub fn new(scene: &'a Scene, min_visible: usize, holding: usize) -> Self {
        Self { scene, min_visible, holding }
    }

    pub fn observe(&self) -> ObservedScene {
        observe(self.scene, self.min_visible)
    }

    pub fn heights(&self) -> ScalarField {
        height_field(self.scene)
    }

    pub fn holding(&self) -> usize {
        self.holding
    }
}

/// A policy together with its execution state.
pub struct Agent {
    kind: PolicyKind,
    planner: Planner,
    queue: VecDeque<PlannedGrasp>,
    pending: Option<Action>,
    chain: Chain,
    area_threshold: f64,
    stale_skips: usize,
    cycles: usize,
    fallbacks: usize,
}

impl Agent {
    pub fn new(kind: PolicyKind, planner: Planner) -> Self {
        let area_threshold = planner.policy.grasp_area_threshold;
        Self {
            kind,
            planner,
            queue: VecDeque::new(),
            pending: None,
            chain: Chain::default(),
            area_threshold,
            stale_skips: 0,
            cycles: 0,
            fallbacks: 0,
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Planned grasps skipped as stale since the last call.
    pub fn take_stale_skips(&mut self) -> usize {
        std::mem::take(&mut self.stale_skips)
    }

    /// Planning cycles started so far.
    pub fn cycles(&self) -> usize {
        self.cycles
    }

    /// Random grasps taken because no plan was available.
    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    /// The next action, or `None` once the workspace is clear and nothing
    /// is held.
    pub fn next_action<R: Rng + ?Sized>(&mut self, cam: &Camera, rng: &mut R) -> Result<Option<Action>, RasterError> {
        if let Some(a) = self.pending.take() {
            return Ok(Some(a));
        }
        match self.kind {
            PolicyKind::Random | PolicyKind::MaxHeight | PolicyKind::MaxVolume => {
                let obs = cam.observe();
                let grasp = match self.kind {
                    PolicyKind::Random => random_policy(&obs, rng),
                    PolicyKind::MaxHeight => depth_grasp(&obs, &self.planner.policy, DepthVariant::Height),
                    _ => depth_grasp(&obs, &self.planner.policy, DepthVariant::Volume),
                };
                Ok(grasp.map(|g| self.pick_then_transport(g)))
            }
            PolicyKind::Segment | PolicyKind::HybridHeight | PolicyKind::HybridVolume => self.next_cycle_pick(cam, rng),
            PolicyKind::Consolidation => self.next_consolidation(cam, rng),
        }
    }

    fn pick_then_transport(&mut self, grasp: Grasp) -> Action {
        self.pending = Some(Action::Transport);
        Action::Pick { grasp }
    }

    fn fallback<R: Rng + ?Sized>(&mut self, obs: &ObservedScene, rng: &mut R) -> Option<Action> {
        self.fallbacks += 1;
        random_policy(obs, rng).map(|g| self.pick_then_transport(g))
    }

    /// Pops planned grasps until one is still fresh.
    fn pop_fresh(&mut self, heights: &mut Option<ScalarField>, cam: &Camera) -> Option<PlannedGrasp> {
        while let Some(g) = self.queue.pop_front() {
            let h = heights.get_or_insert_with(|| cam.heights());
            if staleness_check(h, &g.snapshot, self.planner.policy.staleness_tol) {
                self.stale_skips += 1;
                continue;
            }
            return Some(g);
        }
        None
    }

    fn start_cycle<R: Rng + ?Sized>(&mut self, obs: &ObservedScene, order: BasketOrder, rng: &mut R) -> Result<bool, RasterError> {
        self.cycles += 1;
        self.area_threshold = self.planner.policy.area_threshold_cells(obs.meta().cell_size);
        let plan = segment_cycle(obs, &self.planner, order, rng)?;
        self.queue = plan.grasps.into();
        Ok(!self.queue.is_empty())
    }

    fn next_cycle_pick<R: Rng + ?Sized>(&mut self, cam: &Camera, rng: &mut R) -> Result<Option<Action>, RasterError> {
        let mut heights = None;
        if let Some(g) = self.pop_fresh(&mut heights, cam) {
            return Ok(Some(self.pick_then_transport(g.grasp)));
        }
        let obs = cam.observe();
        if obs.foreground.is_empty() {
            return Ok(None);
        }
        let variant = match self.kind {
            PolicyKind::HybridHeight => Some(DepthVariant::Height),
            PolicyKind::HybridVolume => Some(DepthVariant::Volume),
            _ => None,
        };
        if let Some(v) = variant {
            if hybrid_dispatch(&obs.heights, self.planner.policy.height_threshold) == HybridBranch::Depth {
                let g = depth_grasp(&obs, &self.planner.policy, v).expect("foreground is non-empty");
                return Ok(Some(self.pick_then_transport(g)));
            }
        }
        if !self.start_cycle(&obs, BasketOrder::NearestFirst, rng)? {
            return Ok(self.fallback(&obs, rng));
        }
        let g = self.queue.pop_front().expect("cycle produced grasps");
        Ok(Some(self.pick_then_transport(g.grasp)))
    }

    fn next_consolidation<R: Rng + ?Sized>(&mut self, cam: &Camera, rng: &mut R) -> Result<Option<Action>, RasterError> {
        if cam.holding() == 0 {
            // A chain only continues while something is in hand.
            self.chain.reset();
        }
        let mut heights = None;
        loop {
            let next = if self.chain.open {
                self.queue.pop_front()
            } else {
                self.pop_fresh(&mut heights, cam)
            };
            let Some(g) = next else {
                if cam.holding() > 0 {
                    self.chain.reset();
                    return Ok(Some(Action::Transport));
                }
                let obs = cam.observe();
                if obs.foreground.is_empty() {
                    return Ok(None);
                }
                if !self.start_cycle(&obs, BasketOrder::FarthestFirst, rng)? {
                    return Ok(self.fallback(&obs, rng));
                }
                continue;
            };
            return Ok(Some(match self.chain.step(g.expected_area, self.area_threshold) {
                Step::Start => Action::Pick { grasp: g.grasp },
                Step::Extend => {
                    self.pending = Some(Action::Pick { grasp: g.grasp });
                    Action::PlaceInWorkspace { place: g.grasp.point() }
                }
                Step::Close => {
                    self.queue.push_front(g);
                    Action::Transport
                }
            }));
        }
    }
}

#[cfg(test)]
mod tests;
