//! Garment outlines and the procedural garment library.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::raster::{BitMask, GridMeta, Point};

/// Flat garment footprint in its own frame: a star-shaped polygon united
/// with a few discs. Coordinates in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outline {
    pub polygon: Vec<Point>,
    /// `(center, radius)` pairs.
    pub discs: Vec<(Point, f64)>,
}

impl Outline {
    pub fn contains(&self, p: Point) -> bool {
        self.discs.iter().any(|(c, r)| (p.x - c.x).powi(2) + (p.y - c.y).powi(2) <= r * r)
            || point_in_polygon(&self.polygon, p)
    }

    /// Distance from the local origin to the farthest point of the outline.
    pub fn reach(&self) -> f64 {
        let poly = self.polygon.iter().map(|v| v.x.hypot(v.y)).fold(0.0, f64::max);
        self.discs.iter().map(|(c, r)| c.x.hypot(c.y) + r).fold(poly, f64::max)
    }

    pub fn scaled(&self, k: f64) -> Outline {
        Outline {
            polygon: self.polygon.iter().map(|v| Point::new(v.x * k, v.y * k)).collect(),
            discs: self.discs.iter().map(|(c, r)| (Point::new(c.x * k, c.y * k), r * k)).collect(),
        }
    }

    /// Lattice-point count at spacing `cell_size` with a lattice point at the
    /// origin: the unclipped area in cells.
    pub fn lattice_area(&self, cell_size: f64) -> usize {
        let n = (self.reach() / cell_size).ceil() as i64 + 1;
        let mut count = 0;
        for r in -n..=n {
            for c in -n..=n {
                if self.contains(Point::new(c as f64 * cell_size, r as f64 * cell_size)) {
                    count += 1;
                }
            }
        }
        count
    }
}

fn point_in_polygon(poly: &[Point], p: Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Rigid placement of an outline: world = t + R(rotation) * (scale * local).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub rotation: f64,
    pub scale: f64,
}

impl Pose {
    pub fn to_local(&self, p: Point) -> Point {
        let (s, c) = self.rotation.sin_cos();
        let (dx, dy) = ((p.x - self.x) / self.scale, (p.y - self.y) / self.scale);
        Point::new(dx * c + dy * s, -dx * s + dy * c)
    }
}

/// Rasterizes a posed outline; cells off the grid are dropped.
pub fn rasterize_outline(outline: &Outline, pose: &Pose, meta: &GridMeta) -> BitMask {
    let reach = outline.reach() * pose.scale;
    let mut mask = BitMask::empty(*meta);
    let Some(win) = meta.cell_window(
        Point::new(pose.x - reach, pose.y - reach),
        Point::new(pose.x + reach, pose.y + reach),
    ) else {
        return mask;
    };
    for row in win.r0..=win.r1 {
        for col in win.c0..=win.c1 {
            if outline.contains(pose.to_local(meta.cell_center(col, row))) {
                mask.set(col, row, true);
            }
        }
    }
    mask
}

/// One entry of the garment library.
#[derive(Clone, Debug, PartialEq)]
pub struct LibraryGarment {
    pub outline: Outline,
    /// Meters.
    pub thickness: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LibrarySpec {
    pub count: usize,
    /// Footprint areas in square meters, spread evenly over the range.
    pub min_area: f64,
    pub max_area: f64,
    pub min_thickness: f64,
    pub max_thickness: f64,
    pub seed: u64,
}

impl Default for LibrarySpec {
    fn default() -> Self {
        Self { count: 10, min_area: 0.01, max_area: 0.06, min_thickness: 0.005, max_thickness: 0.015, seed: 2024 }
    }
}

impl LibrarySpec {
    /// Small items for the non-overlapping scaling sweep, sized so `count`
    /// of them fit on the default workspace with room to spare.
    pub fn scaling(count: usize, seed: u64) -> Self {
        Self { count, min_area: 0.003, max_area: 0.006, seed, ..Self::default() }
    }
}

/// Procedural garments: star-shaped blobs, some elongated, some with lobes.
pub fn garment_library(spec: &LibrarySpec) -> Vec<LibraryGarment> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count)
        .map(|i| {
            let t = if spec.count > 1 { i as f64 / (spec.count - 1) as f64 } else { 0.5 };
            let area = spec.min_area + t * (spec.max_area - spec.min_area);
            let outline = random_outline(&mut rng, area);
            let thickness = rng.gen_range(spec.min_thickness..=spec.max_thickness);
            LibraryGarment { outline, thickness }
        })
        .collect()
}

fn random_outline<R: Rng>(rng: &mut R, target_area: f64) -> Outline {
    let vertices = rng.gen_range(6..=10);
    let stretch = rng.gen_range(1.0..2.5);
    let mut angles: Vec<f64> = (0..vertices)
        .map(|k| (k as f64 + rng.gen_range(-0.3..0.3)) * 2.0 * PI / vertices as f64)
        .collect();
    angles.sort_by(f64::total_cmp);
    let polygon: Vec<Point> = angles
        .iter()
        .map(|&a| {
            let r = rng.gen_range(0.75..1.25);
            Point::new(r * a.cos() * stretch, r * a.sin())
        })
        .collect();
    let lobes = rng.gen_range(0..=2);
    let discs = (0..lobes)
        .map(|_| {
            let v = polygon[rng.gen_range(0..polygon.len())];
            (Point::new(v.x * 0.8, v.y * 0.8), rng.gen_range(0.3..0.5))
        })
        .collect();
    let raw = Outline { polygon, discs };
    // Area scales quadratically; measure on a fine lattice and rescale.
    let probe = 0.02;
    let area = raw.lattice_area(probe) as f64 * probe * probe;
    raw.scaled((target_area / area).sqrt())
}
