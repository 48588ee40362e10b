//! Episodes, metrics and benchmark orchestration.
//!
//! Episode `i` of a benchmark uses scene seed `base_seed + i` for every
//! policy, so policies are compared on identical scenes. The scene is drawn
//! from that seed's main ChaCha stream and the episode (policy choices and
//! grasp outcomes) from stream 1, which keeps results independent of worker
//! count and scheduling.

mod bench;
mod studies;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub use bench::{bench, episodes_csv, format_report, save_report, BenchReport, PolicySummary};
pub use studies::{calibration_run, save_scaling, scaling_bench, scaling_csv, CalibrationStats, ScalingRow, PLACEMENT_ATTEMPTS};

use crate::candidates::CandidateConfig;
use crate::error::HarnessError;
use crate::policies::{Action, Agent, Camera, Planner, PolicyConfig, PolicyKind};
use crate::predictor::{GripperSpec, PredictorConfig};
use crate::scene::{apply_grasp, apply_place, garment_library, generate_scene, transport, LibrarySpec, Scene, SimConfig};
use crate::setcover::SolverConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    /// Garments per scene.
    pub garments: usize,
    /// Episodes per policy.
    pub episodes: usize,
    pub base_seed: u64,
    pub policies: Vec<PolicyKind>,
    /// Step bound is this times the initial garment count.
    pub max_steps_per_garment: usize,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            garments: 10,
            episodes: 25,
            base_seed: 0,
            policies: PolicyKind::ALL.to_vec(),
            max_steps_per_garment: 50,
            workers: 0,
        }
    }
}

/// Complete run configuration; every section falls back to its defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub bench: BenchConfig,
    pub sim: SimConfig,
    pub library: LibrarySpec,
    pub gripper: GripperSpec,
    pub predictor: PredictorConfig,
    pub candidates: CandidateConfig,
    pub solver: SolverConfig,
    pub policy: PolicyConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Config = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// Hex SHA-256 of the canonical TOML form. The worker count is left
    /// out since it cannot change results.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.bench.workers = 0;
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        self.sim.validate()?;
        if !self.gripper.is_valid() {
            return bad("gripper needs d1 >= d2 > 0");
        }
        if !self.candidates.is_valid() {
            return bad("candidates need r > 0, k >= 1, l >= 1");
        }
        if !(self.predictor.b > 0.0 && self.predictor.b.is_finite()) {
            return bad("predictor b must be positive");
        }
        if !(self.solver.q > 0.0 && self.solver.q < 1.0) {
            return bad("solver q must lie in (0, 1)");
        }
        if self.solver.time_budget.is_some_and(|t| !(t >= 0.0)) {
            return bad("solver time_budget must be non-negative");
        }
        self.policy.validate()?;
        if self.library.count < self.bench.garments {
            return bad("library holds fewer garments than a scene needs");
        }
        if !(self.library.min_area > 0.0 && self.library.min_area <= self.library.max_area) {
            return bad("library areas must satisfy 0 < min_area <= max_area");
        }
        if !(self.library.min_thickness > 0.0 && self.library.min_thickness <= self.library.max_thickness) {
            return bad("library thickness must satisfy 0 < min <= max");
        }
        if self.bench.max_steps_per_garment == 0 {
            return bad("max_steps_per_garment must be positive");
        }
        Ok(())
    }

    pub fn planner(&self) -> Planner {
        Planner {
            gripper: self.gripper,
            predictor: self.predictor,
            candidates: self.candidates,
            solver: self.solver.clone(),
            policy: self.policy,
            basket: self.sim.basket,
        }
    }

    /// The bench scene for `seed`.
    pub fn scene(&self, seed: u64) -> Result<Scene, HarnessError> {
        let library = garment_library(&self.library);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scene = generate_scene(&library, self.bench.garments, &self.sim, &self.gripper, &self.predictor, &mut rng)?;
        scene.rng_seed = seed;
        Ok(scene)
    }
}

/// Random stream driving an episode on the scene generated from `seed`.
pub fn episode_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub action: Action,
    /// Garments delivered to the basket by this action.
    pub removed: Vec<u32>,
    pub held_after: usize,
    /// Planned grasps skipped as stale before this action.
    pub stale_skips: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub policy: PolicyKind,
    pub initial_garments: usize,
    pub steps: Vec<StepRecord>,
    pub transports: usize,
    pub workspace_moves: usize,
    pub objects_removed: usize,
    /// Objects per transport.
    pub opt: f64,
    /// The workspace was cleared within the step bound.
    pub completed: bool,
}

/// Plays `kind` on `scene` until the workspace is clear and the gripper is
/// empty, or `max_steps` actions have been taken.
pub fn run_episode<R: Rng + ?Sized>(
    scene: &Scene,
    kind: PolicyKind,
    planner: &Planner,
    sim: &SimConfig,
    rng: &mut R,
    max_steps: usize,
) -> Result<EpisodeRecord, HarnessError> {
    if scene.is_empty() {
        return Err(HarnessError::Precondition("episode needs a non-empty scene".into()));
    }
    if max_steps == 0 {
        return Err(HarnessError::Precondition("max_steps must be at least 1".into()));
    }
    let mut world = scene.clone();
    let mut held = Vec::new();
    let mut agent = Agent::new(kind, planner.clone());
    let mut steps = Vec::new();
    let (mut transports, mut moves, mut removed_total) = (0, 0, 0);
    let mut completed = false;
    loop {
        if world.is_empty() && held.is_empty() {
            completed = true;
            break;
        }
        if steps.len() >= max_steps {
            break;
        }
        let cam = Camera::new(&world, sim.min_visible, held.len());
        let Some(action) = agent.next_action(&cam, rng).map_err(crate::error::SceneError::from)? else {
            break;
        };
        let mut removed = Vec::new();
        match action {
            Action::Pick { grasp } => {
                if !held.is_empty() {
                    return Err(HarnessError::Precondition(format!("{kind} picked while holding garments")));
                }
                let (next, lifted) = apply_grasp(&world, &grasp, &planner.gripper, &planner.predictor, rng);
                world = next;
                held = lifted;
            }
            Action::PlaceInWorkspace { place } => {
                if held.is_empty() {
                    return Err(HarnessError::Precondition(format!("{kind} placed with an empty gripper")));
                }
                world = apply_place(&world, std::mem::take(&mut held), place, sim.compaction);
                moves += 1;
            }
            Action::Transport => {
                let (next, ids) = transport(&world, std::mem::take(&mut held));
                world = next;
                removed = ids;
                transports += 1;
                removed_total += removed.len();
            }
        }
        steps.push(StepRecord { action, removed, held_after: held.len(), stale_skips: agent.take_stale_skips() });
    }
    let opt = if transports > 0 {
        removed_total as f64 / transports as f64
    } else {
        log::warn!("episode seed {} ({kind}) made no transports", scene.rng_seed);
        removed_total as f64
    };
    Ok(EpisodeRecord {
        seed: scene.rng_seed,
        policy: kind,
        initial_garments: scene.len(),
        steps,
        transports,
        workspace_moves: moves,
        objects_removed: removed_total,
        opt,
        completed,
    })
}

/// Mean objects per transport and its 95% half-width under the normal
/// approximation, `1.96 * s / sqrt(N)`.
pub fn opt_metric(records: &[EpisodeRecord]) -> Result<(f64, f64), HarnessError> {
    let values: Vec<f64> = records.iter().map(|r| r.opt).collect();
    mean_ci95(&values)
}

pub fn mean_ci95(values: &[f64]) -> Result<(f64, f64), HarnessError> {
    if values.len() < 2 {
        return Err(HarnessError::Precondition("confidence interval needs at least two values".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, 1.96 * var.sqrt() / n.sqrt()))
}
