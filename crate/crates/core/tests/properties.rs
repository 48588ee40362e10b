use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use declutter_core::harness::{episode_rng, run_episode, Config};
use declutter_core::policies::{Action, PolicyKind};
use declutter_core::raster::{dilate_within, local_pca_angle, rasterize_ellipse};
use declutter_core::scene::{garment_library, generate_scene, parse_scene, scene_to_string, LibrarySpec};
use declutter_core::setcover::{brute_force, build_milp, plan_failure_prob, solve_exact, solve_greedy};
use declutter_core::{BitMask, EllipseSpec, GridMeta, Point, ProbMatrix, ScalarField, SolverConfig};

fn grid(side: usize) -> GridMeta {
    GridMeta::new(side, side, 0.002, Point::new(0.0, 0.0)).unwrap()
}

prop_compose! {
    fn instance()(n in 1usize..=10, m in 1usize..=5)
        (p in prop::collection::vec(0.0f64..0.95, n * m),
         conflicts in prop::collection::vec(prop::bool::weighted(0.2), n * (n - 1) / 2),
         n in Just(n), m in Just(m)) -> (ProbMatrix, Vec<(usize, usize)>) {
        let mut pairs = Vec::new();
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if conflicts[k] {
                    pairs.push((i, j));
                }
                k += 1;
            }
        }
        (ProbMatrix::new(n, m, p), pairs)
    }
}

fn mask(side: usize) -> impl Strategy<Value = BitMask> {
    prop::collection::vec(prop::bool::weighted(0.15), side * side)
        .prop_map(move |cells| BitMask::from_cells(grid(side), cells).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_matches_brute_force((p, conflicts) in instance()) {
        let inst = build_milp(&p, 0.7, &conflicts).unwrap();
        let exact = solve_exact(&inst, &SolverConfig::default());
        let brute = brute_force(&inst).unwrap();
        prop_assert_eq!(exact.plan.objective(), brute.plan.objective());
        prop_assert_eq!(&exact.dropped_garments, &brute.dropped_garments);
        prop_assert!(inst.is_valid(&exact.plan.selected));
        for (j, f) in plan_failure_prob(&exact.plan, &p).into_iter().enumerate() {
            if exact.dropped_garments.binary_search(&j).is_err() {
                prop_assert!(f <= 0.3 + 1e-9);
            }
        }
    }

    #[test]
    fn greedy_is_valid_and_no_better_than_exact((p, conflicts) in instance()) {
        let inst = build_milp(&p, 0.7, &conflicts).unwrap();
        let greedy = solve_greedy(&inst);
        let exact = solve_exact(&inst, &SolverConfig::default());
        prop_assert!(inst.is_valid(&greedy.plan.selected));
        if greedy.dropped_garments == exact.dropped_garments {
            prop_assert!(greedy.plan.objective() >= exact.plan.objective());
        }
    }

    #[test]
    fn dilation_is_monotone(m in mask(24), r1 in 0.0f64..0.02, extra in 0.0f64..0.02) {
        let small = dilate_within(&m, r1).unwrap();
        let large = dilate_within(&m, r1 + extra).unwrap();
        prop_assert!(m.is_subset_of(&small));
        prop_assert!(small.is_subset_of(&large));
    }

    #[test]
    fn dilation_matches_distance_oracle(m in mask(16), r in 0.0f64..0.012) {
        let meta = grid(16);
        let out = dilate_within(&m, r).unwrap();
        let set: Vec<(usize, usize)> = m.iter_indices().map(|i| meta.col_row(i)).collect();
        let reach = (r / meta.cell_size).powi(2) * (1.0 + 1e-12);
        for i in 0..meta.len() {
            let (c, rr) = meta.col_row(i);
            let near = set.iter().any(|&(x, y)| {
                let (dx, dy) = (x as f64 - c as f64, y as f64 - rr as f64);
                dx * dx + dy * dy <= reach
            });
            prop_assert_eq!(out.get_index(i), near);
        }
    }

    #[test]
    fn pca_invariant_under_half_turn(seed in 0u64..1000) {
        let meta = grid(41);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..meta.len()).map(|_| rand::Rng::gen_range(&mut rng, 0.0..1.0)).collect();
        // A half turn about the center cell maps index i to len - 1 - i.
        let turned: Vec<f64> = values.iter().rev().copied().collect();
        let fg = BitMask::full(meta);
        let center = meta.cell_center(20, 20);
        let a = local_pca_angle(&ScalarField::from_values(meta, values).unwrap(), &fg, center, 0.03);
        let b = local_pca_angle(&ScalarField::from_values(meta, turned).unwrap(), &fg, center, 0.03);
        prop_assert_eq!(a.degenerate, b.degenerate);
        let d = (a.angle - b.angle).rem_euclid(std::f64::consts::PI);
        prop_assert!(d.min(std::f64::consts::PI - d) < 1e-9);
    }

    #[test]
    fn scene_file_round_trip(seed in any::<u64>(), n in 1usize..=10) {
        let cfg = Config::default();
        let library = garment_library(&LibrarySpec::default());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = generate_scene(&library, n, &cfg.sim, &cfg.gripper, &cfg.predictor, &mut rng).unwrap();
        let text = scene_to_string(&scene);
        let back = parse_scene(&text).unwrap();
        prop_assert_eq!(scene_to_string(&back), text);
        prop_assert_eq!(back.ids(), scene.ids());
        prop_assert_eq!(back.foreground(), scene.foreground());
    }
}

#[test]
fn ellipse_area_converges_with_resolution() {
    let spec = EllipseSpec { cx: 0.2, cy: 0.15, theta: 0.3, d1: 0.12, d2: 0.04 };
    let err = |cs: f64| {
        let meta = GridMeta::for_workspace(0.4, 0.3, cs).unwrap();
        let a = rasterize_ellipse(&spec, &meta).area_pixels() as f64 * cs * cs;
        (a - spec.area()).abs() / spec.area()
    };
    assert!(err(0.001) < err(0.004));
}

#[test]
fn episode_bookkeeping_identities() {
    let cfg = Config::default();
    let planner = cfg.planner();
    for kind in PolicyKind::ALL {
        for seed in 0..3 {
            let scene = cfg.scene(seed).unwrap();
            let rec = run_episode(&scene, kind, &planner, &cfg.sim, &mut episode_rng(seed), 500).unwrap();
            let removed: usize = rec.steps.iter().map(|s| s.removed.len()).sum();
            assert_eq!(removed, rec.objects_removed);
            let transports = rec.steps.iter().filter(|s| s.action == Action::Transport).count();
            assert_eq!(transports, rec.transports);
            let moves = rec.steps.iter().filter(|s| matches!(s.action, Action::PlaceInWorkspace { .. })).count();
            assert_eq!(moves, rec.workspace_moves);
            assert!(rec.completed);
            assert_eq!(rec.objects_removed, rec.initial_garments);
        }
    }
}

#[test]
fn config_hash_tracks_every_section() {
    let base = Config::default();
    let h = base.hash();
    let mut variants = Vec::new();
    let mut c = base.clone();
    c.bench.episodes += 1;
    variants.push(c);
    let mut c = base.clone();
    c.sim.cell_size = 0.004;
    variants.push(c);
    let mut c = base.clone();
    c.library.seed += 1;
    variants.push(c);
    let mut c = base.clone();
    c.gripper.d1 += 0.01;
    variants.push(c);
    let mut c = base.clone();
    c.predictor.b += 1.0;
    variants.push(c);
    let mut c = base.clone();
    c.candidates.k += 1;
    variants.push(c);
    let mut c = base.clone();
    c.solver.q = 0.8;
    variants.push(c);
    let mut c = base.clone();
    c.policy.staleness_tol *= 2.0;
    variants.push(c);
    for v in &variants {
        assert_ne!(v.hash(), h);
    }
    let mut c = base.clone();
    c.bench.workers = 8;
    assert_eq!(c.hash(), h);
}

#[test]
fn config_file_round_trip() {
    let cfg = Config::default();
    let back = Config::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
    assert!(Config::from_toml("[nonsense]\nx = 1\n").is_err());
}
