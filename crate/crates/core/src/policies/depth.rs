//! Depth-image heuristics and the random baseline.

use rand::Rng;
use std::f64::consts::FRAC_PI_2;

use crate::predictor::Grasp;
use crate::raster::{local_pca_angle, BitMask, ScalarField};
use crate::scene::ObservedScene;

/// Uniform foreground cell with a uniform jaw angle; `None` on an empty
/// foreground.
pub fn random_policy<R: Rng + ?Sized>(obs: &ObservedScene, rng: &mut R) -> Option<Grasp> {
    let cells: Vec<usize> = obs.foreground.iter_indices().collect();
    if cells.is_empty() {
        return None;
    }
    let p = obs.meta().center_of(cells[rng.gen_range(0..cells.len())]);
    Some(Grasp::new(p.x, p.y, rng.gen_range(-FRAC_PI_2..=FRAC_PI_2)))
}

fn oriented_at(obs: &ObservedScene, index: usize, pca_radius: f64) -> Grasp {
    let p = obs.meta().center_of(index);
    let theta = local_pca_angle(&obs.heights, &obs.foreground, p, pca_radius).angle;
    Grasp::new(p.x, p.y, theta)
}

/// Tallest foreground cell, lowest index on ties, jaws along the local
/// principal axis.
pub fn max_height_policy(obs: &ObservedScene, pca_radius: f64) -> Option<Grasp> {
    let i = obs.heights.argmax_within(&obs.foreground)?;
    Some(oriented_at(obs, i, pca_radius))
}

/// Foreground cell whose disc of radius `radius` holds the most height.
pub fn max_volume_policy(obs: &ObservedScene, radius: f64, pca_radius: f64) -> Option<Grasp> {
    let sums = disc_sums(&obs.heights, radius, Some(&obs.foreground));
    let i = sums.argmax_within(&obs.foreground)?;
    Some(oriented_at(obs, i, pca_radius))
}

/// Sum of `field` over the cells whose centers lie within `radius` of each
/// cell center, evaluated on `within` (elsewhere 0) or everywhere. Discs are
/// assembled from row prefix sums.
pub fn disc_sums(field: &ScalarField, radius: f64, within: Option<&BitMask>) -> ScalarField {
    let meta = *field.meta();
    let (w, h) = (meta.width, meta.height);
    let rc = (radius.max(0.0) / meta.cell_size).floor() as usize;
    let r2 = (radius / meta.cell_size).powi(2);
    let spans: Vec<usize> = (0..=rc).map(|dy| ((r2 - (dy * dy) as f64).max(0.0)).sqrt().floor() as usize).collect();
    let v = field.values();
    let mut prefix = vec![0.0; (w + 1) * h];
    for r in 0..h {
        let row = &mut prefix[r * (w + 1)..(r + 1) * (w + 1)];
        for c in 0..w {
            row[c + 1] = row[c] + v[r * w + c];
        }
    }
    let mut out = ScalarField::zeros(meta);
    let o = out.values_mut();
    for r in 0..h {
        for c in 0..w {
            if within.is_some_and(|m| !m.get(c, r)) {
                continue;
            }
            let mut s = 0.0;
            for rr in r.saturating_sub(rc)..=(r + rc).min(h - 1) {
                let span = spans[rr.abs_diff(r)];
                let lo = c.saturating_sub(span);
                let hi = (c + span).min(w - 1);
                let row = &prefix[rr * (w + 1)..];
                s += row[hi + 1] - row[lo];
            }
            o[r * w + c] = s;
        }
    }
    out
}
