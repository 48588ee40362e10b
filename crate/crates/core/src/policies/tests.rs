use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::raster::GridMeta;
use crate::scene::{observe_with_truth, Garment, Outline, Pose};
use crate::setcover::{build_milp, solve_exact};

fn meta() -> GridMeta {
    GridMeta::for_workspace(1.0, 0.6, 0.002).unwrap()
}

fn rect(w: f64, h: f64) -> Arc<Outline> {
    let (a, b) = (w / 2.0, h / 2.0);
    Arc::new(Outline {
        polygon: vec![Point::new(-a, -b), Point::new(a, -b), Point::new(a, b), Point::new(-a, b)],
        discs: vec![],
    })
}

fn garment(id: u32, w: f64, h: f64, x: f64, y: f64, thickness: f64) -> Garment {
    Garment::new(id, rect(w, h), Pose { x, y, rotation: 0.0, scale: 1.0 }, thickness, meta())
}

fn scene(gs: Vec<Garment>) -> Scene {
    Scene::new(meta(), gs, Point::new(1.3, 0.3), 0).unwrap()
}

#[test]
fn staleness_detects_local_change_only() {
    let before = scene(vec![garment(0, 0.1, 0.1, 0.3, 0.3, 0.01), garment(1, 0.1, 0.1, 0.7, 0.3, 0.01)]);
    let h0 = height_field(&before);
    let snap = Snapshot::capture(&h0, Point::new(0.3, 0.3), 31);
    assert!(!staleness_check(&h0, &snap, 1e-5));
    let removed_near = scene(vec![garment(1, 0.1, 0.1, 0.7, 0.3, 0.01)]);
    assert!(staleness_check(&height_field(&removed_near), &snap, 1e-5));
    let removed_far = scene(vec![garment(0, 0.1, 0.1, 0.3, 0.3, 0.01)]);
    assert!(!staleness_check(&height_field(&removed_far), &snap, 1e-5));
}

#[test]
fn hybrid_threshold_rule() {
    let pile = scene((0..3).map(|k| garment(k, 0.1, 0.1, 0.5, 0.3, 0.04)).collect());
    assert_eq!(hybrid_dispatch(&height_field(&pile), 0.1), HybridBranch::Depth);
    let flat = scene(vec![garment(0, 0.1, 0.1, 0.2, 0.3, 0.015), garment(1, 0.1, 0.1, 0.6, 0.3, 0.015)]);
    assert_eq!(hybrid_dispatch(&height_field(&flat), 0.1), HybridBranch::Segment);
    let exact = ScalarField::from_values(meta(), vec![0.1; meta().len()]).unwrap();
    assert_eq!(hybrid_dispatch(&exact, 0.1), HybridBranch::Segment);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let planner = Planner::default();
    let choice = hybrid_policy(&observe(&pile, 50), &planner, &mut rng).unwrap().unwrap();
    assert!(matches!(choice, HybridChoice::Depth(_)));
    let choice = hybrid_policy(&observe(&flat, 50), &planner, &mut rng).unwrap().unwrap();
    assert!(matches!(choice, HybridChoice::Cycle(_)));
}

fn planned(x: f64, area: f64) -> PlannedGrasp {
    let h = ScalarField::zeros(meta());
    PlannedGrasp {
        grasp: Grasp::new(x, 0.3, 0.0),
        partition_id: 0,
        expected_area: area,
        snapshot: Snapshot::capture(&h, Point::new(x, 0.3), 31),
    }
}

#[test]
fn consolidation_chains_under_threshold() {
    let grasps: Vec<PlannedGrasp> = (0..4).map(|k| planned(0.1 * k as f64 + 0.1, 10.0)).collect();
    let acts = consolidation_actions(&grasps, 1000.0);
    let transports = acts.iter().filter(|a| **a == Action::Transport).count();
    assert_eq!(transports, 1);
    assert_eq!(acts.len(), 1 + 3 * 2 + 1);
    assert!(matches!(acts[1], Action::PlaceInWorkspace { .. }));

    let acts = consolidation_actions(&grasps, 5.0);
    assert_eq!(acts.len(), 8);
    for pair in acts.chunks(2) {
        assert!(matches!(pair[0], Action::Pick { .. }));
        assert_eq!(pair[1], Action::Transport);
    }

    // 10 + 10 fits, a third does not.
    let acts = consolidation_actions(&grasps, 25.0);
    let kinds: Vec<&str> = acts
        .iter()
        .map(|a| match a {
            Action::Pick { .. } => "pick",
            Action::PlaceInWorkspace { .. } => "place",
            Action::Transport => "transport",
        })
        .collect();
    assert_eq!(kinds, ["pick", "place", "pick", "transport", "pick", "place", "pick", "transport"]);
    assert!(consolidation_actions(&[], 25.0).is_empty());
}

#[test]
fn single_garment_cycle_is_one_grasp() {
    let s = scene(vec![garment(0, 0.2, 0.15, 0.5, 0.3, 0.01)]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plan = segment_cycle(&observe(&s, 50), &Planner::default(), BasketOrder::NearestFirst, &mut rng).unwrap();
    assert_eq!(plan.grasps.len(), 1);
    assert!(plan.failure[0] <= 0.3 + 1e-9);
}

#[test]
fn adjacent_pair_shares_one_grasp() {
    // Two garments one cell apart and a third far away.
    let s = scene(vec![
        garment(0, 0.1, 0.1, 0.2, 0.3, 0.01),
        garment(1, 0.1, 0.1, 0.302, 0.3, 0.01),
        garment(2, 0.1, 0.1, 0.8, 0.3, 0.01),
    ]);
    let (obs, truth) = observe_with_truth(&s, 50);
    let planner = Planner::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let table = cycle_table(&obs, &planner, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let plan = segment_cycle(&obs, &planner, BasketOrder::NearestFirst, &mut rng).unwrap();
    assert_eq!(plan.grasps.len(), 2);
    // Nearest to the basket first: the far garment is the closest one.
    assert!(plan.grasps[0].grasp.x > 0.7);
    let g = plan.grasps[1].grasp;
    assert!((0.23..0.28).contains(&g.x), "{g:?}");

    // No single grasp covers all three, so two is optimal for this table.
    let inst = build_milp(&table.p, 0.7, &table.conflicts).unwrap();
    let far = truth.as_slice().iter().position(|&id| id == 2).unwrap();
    let best_far = (0..table.p.n()).map(|i| table.p.get(i, far)).fold(0.0, f64::max);
    let others_near: bool = (0..table.p.n()).all(|i| table.p.get(i, far) == 0.0 || table.p.row(i).iter().filter(|&&v| v > 0.0).count() == 1);
    assert!(best_far >= 0.7 && others_near);
    assert_eq!(solve_exact(&inst, &planner.solver).plan.objective(), 2);
}

#[test]
fn no_segments_means_random_fallback() {
    // Fully visible foreground but every garment below the visibility floor.
    let s = scene(vec![garment(0, 0.01, 0.01, 0.5, 0.3, 0.01)]);
    let cam = Camera::new(&s, 50, 0);
    assert!(cam.observe().segments.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in [PolicyKind::Segment, PolicyKind::Consolidation, PolicyKind::HybridHeight] {
        let mut agent = Agent::new(kind, Planner::default());
        let a = agent.next_action(&cam, &mut rng).unwrap().unwrap();
        assert!(matches!(a, Action::Pick { .. }));
        assert_eq!(agent.fallbacks(), 1);
        assert_eq!(agent.next_action(&Camera::new(&s, 50, 0), &mut rng).unwrap(), Some(Action::Transport));
    }
}

#[test]
fn agents_stop_on_empty_workspace() {
    let s = Scene::empty(meta(), Point::new(1.3, 0.3));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in PolicyKind::ALL {
        let mut agent = Agent::new(kind, Planner::default());
        assert_eq!(agent.next_action(&Camera::new(&s, 50, 0), &mut rng).unwrap(), None);
    }
}

#[test]
fn policy_names_round_trip() {
    for k in PolicyKind::ALL {
        assert_eq!(k.name().parse::<PolicyKind>().unwrap(), k);
    }
    assert!("greedy".parse::<PolicyKind>().is_err());
}

#[test]
fn config_validation() {
    assert!(PolicyConfig::default().validate().is_ok());
    assert!(PolicyConfig { staleness_window: 30, ..PolicyConfig::default() }.validate().is_err());
    assert!(PolicyConfig { height_threshold: 0.0, ..PolicyConfig::default() }.validate().is_err());
}

#[test]
fn area_threshold_scales_with_resolution() {
    let cfg = PolicyConfig::default();
    assert_eq!(cfg.area_threshold_cells(0.002), DEFAULT_GRASP_AREA_THRESHOLD);
    assert!((cfg.area_threshold_cells(0.004) - DEFAULT_GRASP_AREA_THRESHOLD / 4.0).abs() < 1e-9);
}
