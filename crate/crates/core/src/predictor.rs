//! Analytic grasp-success model.
//!
//! The gripper footprint is an ellipse sized to the jaws; the chance of
//! lifting a garment grows with the garment area under the footprint and
//! saturates below one: `p = a / (a + b)`.

use serde::{Deserialize, Serialize};

use crate::raster::{ellipse_cells, BitMask, EllipseSpec, GridMeta};
use crate::DEFAULT_CELL_SIZE;

/// Top-down parallel-jaw grasp; `theta` is the jaw axis angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grasp {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Grasp {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn point(&self) -> crate::raster::Point {
        crate::raster::Point::new(self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GripperSpec {
    /// Jaw span (major axis of the footprint), meters.
    pub d1: f64,
    /// Jaw width (minor axis), meters.
    pub d2: f64,
}

impl Default for GripperSpec {
    fn default() -> Self {
        Self { d1: 0.12, d2: 0.04 }
    }
}

impl GripperSpec {
    pub fn is_valid(&self) -> bool {
        self.d2 > 0.0 && self.d1 >= self.d2 && self.d1.is_finite()
    }

    pub fn footprint(&self, grasp: &Grasp) -> EllipseSpec {
        EllipseSpec { cx: grasp.x, cy: grasp.y, theta: grasp.theta, d1: self.d1, d2: self.d2 }
    }

    /// Nominal footprint area in cells at the given resolution.
    pub fn footprint_pixels(&self, cell_size: f64) -> f64 {
        std::f64::consts::PI * self.d1 * self.d2 / 4.0 / (cell_size * cell_size)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictorConfig {
    /// Normalization constant in pixels at the reference 2 mm resolution.
    pub b: f64,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        Self { b: 100.0 }
    }
}

impl PredictorConfig {
    /// `b` rescaled so probabilities do not depend on grid resolution.
    pub fn effective_b(&self, cell_size: f64) -> f64 {
        self.b * (DEFAULT_CELL_SIZE / cell_size).powi(2)
    }
}

#[inline]
pub fn success_prob(area: f64, b: f64) -> f64 {
    if area <= 0.0 {
        0.0
    } else {
        area / (area + b)
    }
}

fn overlap(cells: &[usize], segment: &BitMask) -> usize {
    cells.iter().filter(|&&i| segment.get_index(i)).count()
}

/// Probability that `grasp` lifts the garment occupying `segment`.
pub fn grasp_prob(grasp: &Grasp, segment: &BitMask, gripper: &GripperSpec, cfg: &PredictorConfig) -> f64 {
    let meta = segment.meta();
    let cells = ellipse_cells(&gripper.footprint(grasp), meta);
    success_prob(overlap(&cells, segment) as f64, cfg.effective_b(meta.cell_size))
}

/// Dense candidate x segment probability table, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMatrix {
    n: usize,
    m: usize,
    p: Vec<f64>,
}

impl ProbMatrix {
    pub fn new(n: usize, m: usize, p: Vec<f64>) -> Self {
        assert_eq!(p.len(), n * m, "probability table shape");
        Self { n, m, p }
    }

    pub fn from_rows(rows: &[Vec<f64>], m: usize) -> Self {
        let mut p = Vec::with_capacity(rows.len() * m);
        for r in rows {
            assert_eq!(r.len(), m, "ragged probability row");
            p.extend_from_slice(r);
        }
        Self { n: rows.len(), m, p }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.m..(i + 1) * self.m]
    }
}

/// `p[i][j] = grasp_prob(candidates[i], segments[j])`, rasterizing each
/// footprint once.
pub fn prob_matrix(
    candidates: &[Grasp],
    segments: &[BitMask],
    meta: &GridMeta,
    gripper: &GripperSpec,
    cfg: &PredictorConfig,
) -> ProbMatrix {
    let m = segments.len();
    let b = cfg.effective_b(meta.cell_size);
    let mut p = Vec::with_capacity(candidates.len() * m);
    if m <= 64 {
        // Per-cell membership bits turn each footprint into one pass.
        let mut member = vec![0u64; meta.len()];
        for (j, seg) in segments.iter().enumerate() {
            for i in seg.iter_indices() {
                member[i] |= 1 << j;
            }
        }
        let mut counts = vec![0usize; m];
        for g in candidates {
            counts.iter_mut().for_each(|c| *c = 0);
            for i in ellipse_cells(&gripper.footprint(g), meta) {
                let mut bits = member[i];
                while bits != 0 {
                    counts[bits.trailing_zeros() as usize] += 1;
                    bits &= bits - 1;
                }
            }
            p.extend(counts.iter().map(|&a| success_prob(a as f64, b)));
        }
    } else {
        for g in candidates {
            let cells = ellipse_cells(&gripper.footprint(g), meta);
            for seg in segments {
                p.push(success_prob(overlap(&cells, seg) as f64, b));
            }
        }
    }
    ProbMatrix { n: candidates.len(), m, p }
}

/// `sum_j p_ij * area(M_j)` for a single grasp.
pub fn expected_area(grasp: &Grasp, segments: &[BitMask], gripper: &GripperSpec, cfg: &PredictorConfig) -> f64 {
    segments
        .iter()
        .map(|s| grasp_prob(grasp, s, gripper, cfg) * s.area_pixels() as f64)
        .sum()
}

/// Same as [`expected_area`] from a precomputed probability row.
pub fn expected_area_from_row(row: &[f64], segment_areas: &[usize]) -> f64 {
    row.iter().zip(segment_areas).map(|(p, &a)| p * a as f64).sum()
}
