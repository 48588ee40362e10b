//! Grasp candidate generation.
//!
//! The foreground is split into partitions of cells that see the same set of
//! nearby segments; a few points are sampled from each partition and every
//! point is expanded into a fan of evenly spaced jaw orientations. Two
//! candidates drawn from the same partition are treated as overlapping.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::RasterError;
use crate::predictor::{GripperSpec, Grasp};
use crate::raster::{dilate_within, BitMask, GridMeta};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CandidateConfig {
    /// Nearby radius in meters.
    pub r: f64,
    /// Points sampled per partition.
    pub k: usize,
    /// Orientations per point.
    pub l: usize,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        Self::for_gripper(&GripperSpec::default())
    }
}

impl CandidateConfig {
    /// Half the jaw width plus a 1 cm margin.
    pub fn for_gripper(g: &GripperSpec) -> Self {
        Self { r: g.d2 / 2.0 + 0.01, k: 5, l: 6 }
    }

    pub fn is_valid(&self) -> bool {
        self.r > 0.0 && self.k >= 1 && self.l >= 1
    }
}

/// Foreground cells sharing one nearby-segment set.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub id: usize,
    /// Sorted indices into the segment list.
    pub key: Vec<usize>,
    /// Sorted row-major cell indices.
    pub cells: Vec<usize>,
}

impl Partition {
    pub fn to_mask(&self, meta: GridMeta) -> BitMask {
        BitMask::from_indices(meta, self.cells.iter().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraspCandidate {
    pub grasp: Grasp,
    pub partition_id: usize,
}

/// Groups foreground cells by the set of segments within `r` of them.
/// Partition ids follow the lexicographic order of the keys.
pub fn partition_foreground(foreground: &BitMask, segments: &[BitMask], r: f64) -> Result<Vec<Partition>, RasterError> {
    let near: Vec<BitMask> = segments.iter().map(|s| dilate_within(s, r)).collect::<Result<_, _>>()?;
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut key = Vec::new();
    for cell in foreground.iter_indices() {
        key.clear();
        key.extend(near.iter().enumerate().filter(|(_, d)| d.get_index(cell)).map(|(j, _)| j));
        match groups.get_mut(&key) {
            Some(cells) => cells.push(cell),
            None => {
                groups.insert(key.clone(), vec![cell]);
            }
        }
    }
    Ok(groups
        .into_iter()
        .enumerate()
        .map(|(id, (key, cells))| Partition { id, key, cells })
        .collect())
}

/// The `l` orientations `-pi/2 + t * pi / l`, `t = 0..l`.
pub fn orientations(l: usize) -> Vec<f64> {
    (0..l).map(|t| -FRAC_PI_2 + t as f64 * PI / l as f64).collect()
}

/// Up to `k` distinct points per partition, each fanned into `l` orientations.
/// Partitions with no nearby segment are skipped.
pub fn sample_candidates<R: Rng + ?Sized>(
    partitions: &[Partition],
    cfg: &CandidateConfig,
    meta: &GridMeta,
    rng: &mut R,
) -> Vec<GraspCandidate> {
    let thetas = orientations(cfg.l);
    let mut out = Vec::new();
    for part in partitions {
        if part.key.is_empty() || part.cells.is_empty() {
            continue;
        }
        let amount = cfg.k.min(part.cells.len());
        for pick in index::sample(rng, part.cells.len(), amount).into_iter() {
            let p = meta.center_of(part.cells[pick]);
            for &theta in &thetas {
                out.push(GraspCandidate { grasp: Grasp::new(p.x, p.y, theta), partition_id: part.id });
            }
        }
    }
    out
}

pub fn conflict(a: &GraspCandidate, b: &GraspCandidate) -> bool {
    a.partition_id == b.partition_id
}

/// All unordered conflicting pairs `(i, j)` with `i < j`.
pub fn conflict_pairs(candidates: &[GraspCandidate]) -> Vec<(usize, usize)> {
    let mut by_part: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, c) in candidates.iter().enumerate() {
        by_part.entry(c.partition_id).or_default().push(i);
    }
    let mut pairs = Vec::new();
    for members in by_part.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn meta(w: usize, h: usize) -> GridMeta {
        GridMeta::new(w, h, 0.01, Point::new(0.0, 0.0)).unwrap()
    }

    fn rect(m: GridMeta, c0: usize, r0: usize, c1: usize, r1: usize) -> BitMask {
        BitMask::from_fn(m, |c, r| c >= c0 && c <= c1 && r >= r0 && r <= r1)
    }

    #[test]
    fn single_segment_single_partition() {
        let m = meta(30, 30);
        let a = rect(m, 5, 5, 15, 15);
        let parts = partition_foreground(&a, &[a.clone()], 0.02).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].key, vec![0]);
        assert_eq!(parts[0].cells.len(), a.area_pixels());
    }

    #[test]
    fn far_segments_do_not_interact() {
        let m = meta(60, 20);
        let a = rect(m, 2, 2, 10, 10);
        let b = rect(m, 40, 2, 50, 10);
        let fg = a.union(&b).unwrap();
        let parts = partition_foreground(&fg, &[a, b], 0.03).unwrap();
        let keys: Vec<_> = parts.iter().map(|p| p.key.clone()).collect();
        assert_eq!(keys, vec![vec![0], vec![1]]);
    }

    #[test]
    fn gap_band_gets_joint_key() {
        let m = meta(40, 20);
        let a = rect(m, 2, 2, 15, 15);
        let b = rect(m, 17, 2, 30, 15);
        let fg = a.union(&b).unwrap();
        let parts = partition_foreground(&fg, &[a.clone(), b.clone()], 0.05).unwrap();
        let keys: Vec<_> = parts.iter().map(|p| p.key.clone()).collect();
        assert_eq!(keys, vec![vec![0], vec![0, 1], vec![1]]);
        // Joint band: columns within 5 cells of the other rectangle.
        let joint = &parts[1];
        for &cell in &joint.cells {
            let (c, _) = m.col_row(cell);
            assert!((12..=15).contains(&c) || (17..=20).contains(&c), "col {c}");
        }
        assert_eq!(joint.cells.len(), 8 * 14);
    }

    #[test]
    fn candidate_counts() {
        let m = meta(20, 20);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = CandidateConfig { r: 0.02, k: 5, l: 6 };
        assert!(sample_candidates(&[], &cfg, &m, &mut rng).is_empty());
        let big = Partition { id: 0, key: vec![0], cells: (0..50).collect() };
        assert_eq!(sample_candidates(&[big.clone()], &cfg, &m, &mut rng).len(), 30);
        let small = Partition { id: 1, key: vec![0], cells: vec![3, 4] };
        assert_eq!(sample_candidates(&[small], &cfg, &m, &mut rng).len(), 12);
        let unkeyed = Partition { id: 2, key: vec![], cells: (0..50).collect() };
        assert!(sample_candidates(&[unkeyed], &cfg, &m, &mut rng).is_empty());
    }

    #[test]
    fn orientation_grid_is_half_open() {
        let t = orientations(6);
        assert_eq!(t.len(), 6);
        assert_eq!(t[0], -FRAC_PI_2);
        assert!((t[5] - (FRAC_PI_2 - PI / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn conflicts_follow_partitions() {
        let a = GraspCandidate { grasp: Grasp::new(0.0, 0.0, 0.0), partition_id: 3 };
        let b = GraspCandidate { grasp: Grasp::new(0.0, 0.0, 1.0), partition_id: 3 };
        let c = GraspCandidate { grasp: Grasp::new(0.0, 0.0, 0.0), partition_id: 4 };
        assert!(conflict(&a, &b) && conflict(&b, &a));
        assert!(!conflict(&a, &c) && !conflict(&c, &a));
        assert_eq!(conflict_pairs(&[a, c, b]), vec![(0, 2)]);
    }
}
