//! Ground-truth world model and the simulator that evolves it.
//!
//! A [`Scene`] is an ordered stack of flat garments, bottom to top. Planners
//! never see it directly; they receive an [`ObservedScene`] holding the
//! foreground, the visible segment of each sufficiently exposed garment and
//! the height field. Grasp outcomes are drawn against the true (possibly
//! occluded) garment footprints with the same success model the planners use.
//!
//! Every operation takes a scene by reference and returns a new one; the
//! per-garment rasters are shared behind `Arc`, so copies are cheap.

mod io;
mod shape;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

pub use io::{load_scene, parse_scene, save_scene, scene_to_string};
pub use shape::{garment_library, rasterize_outline, LibraryGarment, LibrarySpec, Outline, Pose};

use crate::error::SceneError;
use crate::predictor::{success_prob, Grasp, GripperSpec, PredictorConfig};
use crate::raster::{ellipse_cells, BitMask, GridMeta, Point, ScalarField};

/// Simulator parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Workspace extent in meters.
    pub workspace_width: f64,
    pub workspace_height: f64,
    pub cell_size: f64,
    pub basket: Point,
    /// Garments with fewer visible cells produce no segment.
    pub min_visible: usize,
    /// Isotropic shrink applied on every place inside the workspace.
    pub compaction: f64,
    pub shuffle_moves: usize,
    /// Compaction used by the scene-reset moves.
    pub shuffle_compaction: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            workspace_width: 1.0,
            workspace_height: 0.6,
            cell_size: crate::DEFAULT_CELL_SIZE,
            basket: Point::new(1.3, 0.3),
            min_visible: 50,
            compaction: 0.9,
            shuffle_moves: 10,
            shuffle_compaction: 1.0,
        }
    }
}

impl SimConfig {
    pub fn meta(&self) -> Result<GridMeta, SceneError> {
        Ok(GridMeta::for_workspace(self.workspace_width, self.workspace_height, self.cell_size)?)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        self.meta()?;
        if !(self.compaction > 0.0 && self.compaction <= 1.0)
            || !(self.shuffle_compaction > 0.0 && self.shuffle_compaction <= 1.0)
        {
            return Err(SceneError::Format("compaction must lie in (0, 1]".into()));
        }
        if !(self.basket.x.is_finite() && self.basket.y.is_finite()) {
            return Err(SceneError::Format("non-finite basket position".into()));
        }
        Ok(())
    }
}

/// One garment at its current pose.
#[derive(Clone, Debug, PartialEq)]
pub struct Garment {
    pub id: u32,
    pub outline: Arc<Outline>,
    pub pose: Pose,
    /// Meters.
    pub thickness: f64,
    /// Unclipped area in cells of the outline at unit scale.
    pub nominal_area: usize,
    meta: GridMeta,
    /// Sorted indices of the posed, clipped footprint.
    cells: Arc<[u32]>,
}

impl Garment {
    pub fn new(id: u32, outline: Arc<Outline>, pose: Pose, thickness: f64, meta: GridMeta) -> Self {
        let nominal_area = outline.lattice_area(meta.cell_size);
        let cells = posed_cells(&outline, &pose, &meta);
        Self { id, outline, pose, thickness, nominal_area, meta, cells }
    }

    /// Cell indices of the posed footprint, ascending.
    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn mask(&self) -> BitMask {
        BitMask::from_indices(self.meta, self.cells.iter().map(|&i| i as usize))
    }

    pub fn area_pixels(&self) -> usize {
        self.cells.len()
    }

    pub fn covers(&self, index: usize) -> bool {
        self.cells.binary_search(&(index as u32)).is_ok()
    }

    /// Mean position of the posed, clipped footprint.
    pub fn centroid(&self) -> Option<Point> {
        if self.cells.is_empty() {
            return None;
        }
        let (mut sx, mut sy) = (0.0, 0.0);
        for &i in self.cells.iter() {
            let p = self.meta.center_of(i as usize);
            sx += p.x;
            sy += p.y;
        }
        let n = self.cells.len() as f64;
        Some(Point::new(sx / n, sy / n))
    }

    fn with_pose(&self, pose: Pose) -> Self {
        let cells = posed_cells(&self.outline, &pose, &self.meta);
        Self {
            id: self.id,
            outline: self.outline.clone(),
            pose,
            thickness: self.thickness,
            nominal_area: self.nominal_area,
            meta: self.meta,
            cells,
        }
    }
}

fn posed_cells(outline: &Outline, pose: &Pose, meta: &GridMeta) -> Arc<[u32]> {
    let mask = rasterize_outline(outline, pose, meta);
    mask.iter_indices().map(|i| i as u32).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub meta: GridMeta,
    /// Bottom to top; later garments occlude earlier ones.
    pub stack: Vec<Garment>,
    /// Lies outside the workspace.
    pub basket: Point,
    pub rng_seed: u64,
}

impl Scene {
    pub fn new(meta: GridMeta, stack: Vec<Garment>, basket: Point, rng_seed: u64) -> Result<Self, SceneError> {
        let mut ids: Vec<u32> = stack.iter().map(|g| g.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(SceneError::DuplicateId(w[0]));
        }
        if stack.iter().any(|g| g.meta != meta) {
            return Err(crate::error::RasterError::MetaMismatch.into());
        }
        Ok(Self { meta, stack, basket, rng_seed })
    }

    pub fn empty(meta: GridMeta, basket: Point) -> Self {
        Self { meta, stack: Vec::new(), basket, rng_seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn ids(&self) -> Vec<u32> {
        self.stack.iter().map(|g| g.id).collect()
    }

    pub fn foreground(&self) -> BitMask {
        let mut fg = BitMask::empty(self.meta);
        for g in &self.stack {
            for &i in g.cells() {
                fg.set_index(i as usize, true);
            }
        }
        fg
    }
}

/// Sum of the thicknesses of every garment covering each cell.
pub fn height_field(scene: &Scene) -> ScalarField {
    let mut h = ScalarField::zeros(scene.meta);
    let v = h.values_mut();
    for g in &scene.stack {
        for &i in g.cells() {
            v[i as usize] += g.thickness;
        }
    }
    h
}

/// Visible region of one garment, under an id that is only meaningful
/// within a single observation.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub id: usize,
    pub mask: BitMask,
}

/// Everything a planner may look at.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedScene {
    pub foreground: BitMask,
    pub segments: Vec<Segment>,
    pub heights: ScalarField,
}

impl ObservedScene {
    pub fn meta(&self) -> &GridMeta {
        self.foreground.meta()
    }

    pub fn segment_masks(&self) -> Vec<BitMask> {
        self.segments.iter().map(|s| s.mask.clone()).collect()
    }
}

/// Simulator-side map from segment id to the garment it shows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthLink(Vec<u32>);

impl TruthLink {
    pub fn garment(&self, segment: usize) -> Option<u32> {
        self.0.get(segment).copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

pub fn observe(scene: &Scene, min_visible: usize) -> ObservedScene {
    observe_with_truth(scene, min_visible).0
}

/// Observation plus the hidden segment-to-garment link.
pub fn observe_with_truth(scene: &Scene, min_visible: usize) -> (ObservedScene, TruthLink) {
    let meta = scene.meta;
    let mut top = vec![u32::MAX; meta.len()];
    for (k, g) in scene.stack.iter().enumerate() {
        for &i in g.cells() {
            top[i as usize] = k as u32;
        }
    }
    // Order segments by their first visible cell so ids carry no stack order.
    let mut visible: Vec<(usize, usize)> = Vec::new();
    for (k, g) in scene.stack.iter().enumerate() {
        let mut first = None;
        let mut count = 0;
        for &i in g.cells() {
            if top[i as usize] == k as u32 {
                first.get_or_insert(i as usize);
                count += 1;
            }
        }
        if count >= min_visible.max(1) {
            visible.push((first.unwrap_or(0), k));
        }
    }
    visible.sort_unstable();
    let mut segments = Vec::with_capacity(visible.len());
    let mut link = Vec::with_capacity(visible.len());
    for (id, &(_, k)) in visible.iter().enumerate() {
        let g = &scene.stack[k];
        let mask = BitMask::from_indices(
            meta,
            g.cells().iter().map(|&i| i as usize).filter(|&i| top[i] == k as u32),
        );
        segments.push(Segment { id, mask });
        link.push(g.id);
    }
    let obs = ObservedScene {
        foreground: scene.foreground(),
        segments,
        heights: height_field(scene),
    };
    (obs, TruthLink(link))
}

fn uniform_point<R: Rng + ?Sized>(meta: &GridMeta, rng: &mut R) -> Point {
    let (lo, hi) = meta.bounds();
    Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y))
}

/// Draws `n` garments from the library, drops each at a uniform pose and
/// shuffles the result with `cfg.shuffle_moves` random moves.
pub fn generate_scene<R: Rng + ?Sized>(
    library: &[LibraryGarment],
    n: usize,
    cfg: &SimConfig,
    gripper: &GripperSpec,
    pred: &PredictorConfig,
    rng: &mut R,
) -> Result<Scene, SceneError> {
    if n > library.len() {
        return Err(SceneError::NotEnoughGarments { requested: n, available: library.len() });
    }
    let meta = cfg.meta()?;
    let picks = index::sample(rng, library.len(), n);
    let mut stack = Vec::with_capacity(n);
    for k in picks.iter() {
        let item = &library[k];
        let c = uniform_point(&meta, rng);
        let pose = Pose { x: c.x, y: c.y, rotation: rng.gen_range(-PI..PI), scale: 1.0 };
        stack.push(Garment::new(k as u32, Arc::new(item.outline.clone()), pose, item.thickness, meta));
    }
    let scene = Scene { meta, stack, basket: cfg.basket, rng_seed: 0 };
    if scene.is_empty() {
        return Ok(scene);
    }
    Ok(shuffle(&scene, cfg.shuffle_moves, cfg.shuffle_compaction, gripper, pred, rng))
}

/// Every library garment placed fully inside the workspace with no two
/// footprints sharing a cell, by rejection sampling.
pub fn generate_separated_scene<R: Rng + ?Sized>(
    library: &[LibraryGarment],
    cfg: &SimConfig,
    attempts: usize,
    rng: &mut R,
) -> Result<Scene, SceneError> {
    let meta = cfg.meta()?;
    let (lo, hi) = meta.bounds();
    let mut occupied = vec![false; meta.len()];
    let mut stack = Vec::with_capacity(library.len());
    for (k, item) in library.iter().enumerate() {
        let reach = item.outline.reach();
        if hi.x - lo.x <= 2.0 * reach || hi.y - lo.y <= 2.0 * reach {
            return Err(SceneError::PlacementFailed(library.len()));
        }
        let outline = Arc::new(item.outline.clone());
        let mut placed = None;
        for _ in 0..attempts {
            let pose = Pose {
                x: rng.gen_range(lo.x + reach..hi.x - reach),
                y: rng.gen_range(lo.y + reach..hi.y - reach),
                rotation: rng.gen_range(-PI..PI),
                scale: 1.0,
            };
            let g = Garment::new(k as u32, outline.clone(), pose, item.thickness, meta);
            if g.cells().iter().all(|&i| !occupied[i as usize]) {
                placed = Some(g);
                break;
            }
        }
        let g = placed.ok_or(SceneError::PlacementFailed(library.len()))?;
        for &i in g.cells() {
            occupied[i as usize] = true;
        }
        stack.push(g);
    }
    Ok(Scene { meta, stack, basket: cfg.basket, rng_seed: 0 })
}

/// Random pick-and-place moves inside the workspace.
pub fn shuffle<R: Rng + ?Sized>(
    scene: &Scene,
    n_moves: usize,
    compaction: f64,
    gripper: &GripperSpec,
    pred: &PredictorConfig,
    rng: &mut R,
) -> Scene {
    let mut s = scene.clone();
    for _ in 0..n_moves {
        let fg: Vec<usize> = s.foreground().iter_indices().collect();
        if fg.is_empty() {
            break;
        }
        let at = s.meta.center_of(fg[rng.gen_range(0..fg.len())]);
        let grasp = Grasp::new(at.x, at.y, rng.gen_range(-FRAC_PI_2..FRAC_PI_2));
        let (after, held) = apply_grasp(&s, &grasp, gripper, pred, rng);
        let place = uniform_point(&s.meta, rng);
        s = apply_place(&after, held, place, compaction);
    }
    s
}

/// Number of footprint cells of `g` among the sorted `cells`.
fn overlap(g: &Garment, cells: &[usize]) -> usize {
    cells.iter().filter(|&&i| g.covers(i)).count()
}

/// Lifts each garment independently with the predicted probability computed
/// on its true footprint. Lifted garments leave the stack, keeping order.
pub fn apply_grasp<R: Rng + ?Sized>(
    scene: &Scene,
    grasp: &Grasp,
    gripper: &GripperSpec,
    pred: &PredictorConfig,
    rng: &mut R,
) -> (Scene, Vec<Garment>) {
    let cells = ellipse_cells(&gripper.footprint(grasp), &scene.meta);
    let b = pred.effective_b(scene.meta.cell_size);
    let mut stack = Vec::with_capacity(scene.stack.len());
    let mut held = Vec::new();
    for g in &scene.stack {
        let p = success_prob(overlap(g, &cells) as f64, b);
        // One draw per garment keeps the stream aligned across outcomes.
        let u: f64 = rng.gen();
        if u < p {
            held.push(g.clone());
        } else {
            stack.push(g.clone());
        }
    }
    (Scene { stack, ..scene.clone() }, held)
}

/// Drops the held garments centered on `place`, each shrunk by `compaction`
/// about its centroid, on top of the stack in their held order.
pub fn apply_place(scene: &Scene, held: Vec<Garment>, place: Point, compaction: f64) -> Scene {
    let mut s = scene.clone();
    for g in held {
        let c = g.centroid().unwrap_or(Point::new(g.pose.x, g.pose.y));
        let pose = Pose {
            x: place.x + compaction * (g.pose.x - c.x),
            y: place.y + compaction * (g.pose.y - c.y),
            rotation: g.pose.rotation,
            scale: g.pose.scale * compaction,
        };
        let mut moved = g.with_pose(pose);
        if moved.cells().is_empty() {
            // The outline always contains its own origin.
            moved = g.with_pose(Pose { x: place.x, y: place.y, ..pose });
        }
        s.stack.push(moved);
    }
    s
}

/// Delivers the held garments to the basket and returns their ids.
pub fn transport(scene: &Scene, held: Vec<Garment>) -> (Scene, Vec<u32>) {
    (scene.clone(), held.into_iter().map(|g| g.id).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rect(w: f64, h: f64) -> Arc<Outline> {
        let (a, b) = (w / 2.0, h / 2.0);
        Arc::new(Outline {
            polygon: vec![Point::new(-a, -b), Point::new(a, -b), Point::new(a, b), Point::new(-a, b)],
            discs: vec![],
        })
    }

    fn meta() -> GridMeta {
        GridMeta::for_workspace(1.0, 0.6, 0.002).unwrap()
    }

    fn at(x: f64, y: f64) -> Pose {
        Pose { x, y, rotation: 0.0, scale: 1.0 }
    }

    #[test]
    fn empty_scene_has_zero_heights() {
        let s = Scene::empty(meta(), Point::new(1.3, 0.3));
        assert_eq!(height_field(&s).max(), 0.0);
        let obs = observe(&s, 50);
        assert!(obs.foreground.is_empty() && obs.segments.is_empty());
    }

    #[test]
    fn overlapping_heights_add() {
        let m = meta();
        let a = Garment::new(0, rect(0.1, 0.1), at(0.3, 0.3), 0.01, m);
        let b = Garment::new(1, rect(0.1, 0.1), at(0.35, 0.3), 0.01, m);
        let s = Scene::new(m, vec![a, b], Point::new(1.3, 0.3), 0).unwrap();
        let h = height_field(&s);
        assert!((h.max() - 0.02).abs() < 1e-15);
        let (c, r) = m.cell_of(Point::new(0.27, 0.3)).unwrap();
        assert_eq!(h.get(c, r), 0.01);
    }

    #[test]
    fn full_occlusion_hides_segment() {
        let m = meta();
        let under = Garment::new(0, rect(0.05, 0.05), at(0.3, 0.3), 0.01, m);
        let over = Garment::new(1, rect(0.2, 0.2), at(0.3, 0.3), 0.01, m);
        let s = Scene::new(m, vec![under.clone(), over.clone()], Point::new(1.3, 0.3), 0).unwrap();
        let (obs, truth) = observe_with_truth(&s, 50);
        assert_eq!(obs.segments.len(), 1);
        assert_eq!(truth.garment(0), Some(1));
        assert_eq!(obs.foreground, over.mask().union(&under.mask()).unwrap());
        assert!((obs.heights.max() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn half_covered_segment_is_exposed_half() {
        let m = meta();
        let low = Garment::new(0, rect(0.2, 0.1), at(0.3, 0.3), 0.01, m);
        let high = Garment::new(1, rect(0.1, 0.1), at(0.35, 0.3), 0.01, m);
        let s = Scene::new(m, vec![low.clone(), high.clone()], Point::new(1.3, 0.3), 0).unwrap();
        let (obs, truth) = observe_with_truth(&s, 50);
        let j = truth.as_slice().iter().position(|&g| g == 0).unwrap();
        let expected = low.mask().subtract(&high.mask()).unwrap();
        assert_eq!(obs.segments[j].mask, expected);
        assert_eq!(expected.area_pixels(), low.area_pixels() / 2);
    }

    #[test]
    fn disjoint_garments_give_full_segments() {
        let m = meta();
        let gs: Vec<Garment> = (0..4)
            .map(|k| Garment::new(k, rect(0.08, 0.08), at(0.1 + 0.2 * k as f64, 0.3), 0.01, m))
            .collect();
        let s = Scene::new(m, gs.clone(), Point::new(1.3, 0.3), 0).unwrap();
        let (obs, truth) = observe_with_truth(&s, 50);
        assert_eq!(obs.segments.len(), 4);
        for (seg, &id) in obs.segments.iter().zip(truth.as_slice()) {
            assert_eq!(seg.mask, gs[id as usize].mask());
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let m = meta();
        let g = Garment::new(3, rect(0.05, 0.05), at(0.3, 0.3), 0.01, m);
        assert!(matches!(
            Scene::new(m, vec![g.clone(), g], Point::new(1.3, 0.3), 0),
            Err(SceneError::DuplicateId(3))
        ));
    }

    #[test]
    fn generation_is_deterministic_and_complete() {
        let lib = garment_library(&LibrarySpec::default());
        let cfg = SimConfig::default();
        let mk = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            generate_scene(&lib, 10, &cfg, &GripperSpec::default(), &PredictorConfig::default(), &mut rng).unwrap()
        };
        let a = mk(7);
        assert_eq!(a, mk(7));
        let mut ids = a.ids();
        ids.sort_unstable();
        assert_eq!(ids, (0..10).collect::<Vec<_>>());
        assert!(matches!(
            generate_scene(&lib, 11, &cfg, &GripperSpec::default(), &PredictorConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(SceneError::NotEnoughGarments { .. })
        ));
        let empty = generate_scene(&lib, 0, &cfg, &GripperSpec::default(), &PredictorConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn shuffle_preserves_garments() {
        let lib = garment_library(&LibrarySpec::default());
        let cfg = SimConfig { shuffle_moves: 0, ..SimConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (g, p) = (GripperSpec::default(), PredictorConfig::default());
        let s = generate_scene(&lib, 10, &cfg, &g, &p, &mut rng).unwrap();
        assert_eq!(shuffle(&s, 0, 1.0, &g, &p, &mut rng), s);
        let t = shuffle(&s, 25, 0.9, &g, &p, &mut rng);
        let (mut a, mut b) = (s.ids(), t.ids());
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn grasp_over_empty_region_holds_nothing() {
        let m = meta();
        let g = Garment::new(0, rect(0.05, 0.05), at(0.1, 0.1), 0.01, m);
        let s = Scene::new(m, vec![g], Point::new(1.3, 0.3), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (after, held) = apply_grasp(&s, &Grasp::new(0.8, 0.4, 0.0), &GripperSpec::default(), &PredictorConfig::default(), &mut rng);
        assert!(held.is_empty());
        assert_eq!(after, s);
    }

    #[test]
    fn stacked_large_garments_are_both_lifted() {
        let m = meta();
        let a = Garment::new(0, rect(0.2, 0.2), at(0.3, 0.3), 0.01, m);
        let b = Garment::new(1, rect(0.2, 0.2), at(0.3, 0.3), 0.01, m);
        let s = Scene::new(m, vec![a, b], Point::new(1.3, 0.3), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (g, p) = (GripperSpec::default(), PredictorConfig::default());
        let n = 2000;
        let both = (0..n)
            .filter(|_| apply_grasp(&s, &Grasp::new(0.3, 0.3, 0.0), &g, &p, &mut rng).1.len() == 2)
            .count();
        let a = ellipse_cells(&g.footprint(&Grasp::new(0.3, 0.3, 0.0)), &m).len() as f64;
        let p1 = a / (a + 100.0);
        assert!((both as f64 / n as f64 - p1 * p1).abs() < 0.03);
    }

    #[test]
    fn place_translates_and_compacts() {
        let m = meta();
        let g = Garment::new(0, rect(0.1, 0.06), at(0.3, 0.3), 0.01, m);
        let s = Scene::empty(m, Point::new(1.3, 0.3));
        let target = Point::new(0.6, 0.2);
        let placed = apply_place(&s, vec![g.clone()], target, 1.0);
        let moved = &placed.stack[0];
        assert_eq!(moved.area_pixels(), g.area_pixels());
        let c = moved.centroid().unwrap();
        assert!(c.distance(target) < 0.0011);
        let shrunk = apply_place(&s, vec![g.clone()], target, 0.9);
        let ratio = shrunk.stack[0].area_pixels() as f64 / g.area_pixels() as f64;
        assert!((ratio - 0.81).abs() < 0.02, "{ratio}");
        assert_eq!(apply_place(&s, vec![], target, 0.9), s);
    }

    #[test]
    fn place_keeps_held_order_on_top() {
        let m = meta();
        let base = Garment::new(0, rect(0.1, 0.1), at(0.5, 0.3), 0.01, m);
        let s = Scene::new(m, vec![base], Point::new(1.3, 0.3), 0).unwrap();
        let h1 = Garment::new(1, rect(0.05, 0.05), at(0.2, 0.2), 0.01, m);
        let h2 = Garment::new(2, rect(0.05, 0.05), at(0.2, 0.4), 0.01, m);
        let out = apply_place(&s, vec![h1, h2], Point::new(0.5, 0.3), 0.9);
        assert_eq!(out.ids(), vec![0, 1, 2]);
    }

    #[test]
    fn separated_scene_has_no_overlap() {
        let lib = garment_library(&LibrarySpec::scaling(35, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = generate_separated_scene(&lib, &SimConfig::default(), 10_000, &mut rng).unwrap();
        assert_eq!(s.len(), 35);
        let total: usize = s.stack.iter().map(|g| g.area_pixels()).sum();
        assert_eq!(s.foreground().area_pixels(), total);
        assert_eq!(observe(&s, 50).segments.len(), 35);
    }
}
