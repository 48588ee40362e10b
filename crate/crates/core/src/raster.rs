//! Grid geometry over the work surface.
//!
//! Everything a planner or the simulator measures lives on a fixed grid of
//! square cells: boolean masks for garments and segments, scalar fields for
//! heights, and the handful of operators the planners need (ellipse
//! rasterization, majority cleanup, Euclidean dilation, local PCA).
//!
//! Cells are addressed row-major; cell `(col, row)` has its center at
//! `origin + (col, row) * cell_size` in workspace meters.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::RasterError;

/// A point on the work surface, in meters.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Discretization of a rectangular region of the work surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub width: usize,
    pub height: usize,
    /// Meters per cell side.
    pub cell_size: f64,
    /// Workspace coordinate of the center of cell `(0, 0)`.
    pub origin: Point,
}

impl GridMeta {
    pub fn new(width: usize, height: usize, cell_size: f64, origin: Point) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::InvalidMeta(format!("{width}x{height} grid")));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(RasterError::InvalidMeta(format!("cell size {cell_size}")));
        }
        if !(origin.x.is_finite() && origin.y.is_finite()) {
            return Err(RasterError::InvalidMeta("non-finite origin".into()));
        }
        Ok(Self { width, height, cell_size, origin })
    }

    /// Grid tiling the axis-aligned rectangle `[0, w] x [0, h]` exactly.
    pub fn for_workspace(w: f64, h: f64, cell_size: f64) -> Result<Self, RasterError> {
        let width = (w / cell_size).round() as usize;
        let height = (h / cell_size).round() as usize;
        Self::new(width, height, cell_size, Point::new(cell_size / 2.0, cell_size / 2.0))
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn col_row(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    #[inline]
    pub fn cell_center(&self, col: usize, row: usize) -> Point {
        Point::new(
            self.origin.x + col as f64 * self.cell_size,
            self.origin.y + row as f64 * self.cell_size,
        )
    }

    #[inline]
    pub fn center_of(&self, index: usize) -> Point {
        let (c, r) = self.col_row(index);
        self.cell_center(c, r)
    }

    /// Fractional cell coordinates of a world point.
    #[inline]
    pub fn to_cell_f(&self, p: Point) -> (f64, f64) {
        (
            (p.x - self.origin.x) / self.cell_size,
            (p.y - self.origin.y) / self.cell_size,
        )
    }

    /// Nearest cell to a world point, or `None` when it falls off the grid.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let (fc, fr) = self.to_cell_f(p);
        let (c, r) = (fc.round(), fr.round());
        if c < 0.0 || r < 0.0 || c >= self.width as f64 || r >= self.height as f64 {
            return None;
        }
        Some((c as usize, r as usize))
    }

    /// World-space extent covered by the cells, edges included.
    pub fn bounds(&self) -> (Point, Point) {
        let h = self.cell_size / 2.0;
        (
            Point::new(self.origin.x - h, self.origin.y - h),
            Point::new(
                self.origin.x + (self.width as f64 - 0.5) * self.cell_size,
                self.origin.y + (self.height as f64 - 0.5) * self.cell_size,
            ),
        )
    }

    pub fn contains(&self, p: Point) -> bool {
        let (lo, hi) = self.bounds();
        p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y
    }

    /// Inclusive cell range whose centers may fall inside the world box, clipped.
    pub(crate) fn cell_window(&self, lo: Point, hi: Point) -> Option<CellWindow> {
        let (c0, r0) = self.to_cell_f(lo);
        let (c1, r1) = self.to_cell_f(hi);
        let c0 = c0.ceil().max(0.0);
        let r0 = r0.ceil().max(0.0);
        let c1 = c1.floor().min(self.width as f64 - 1.0);
        let r1 = r1.floor().min(self.height as f64 - 1.0);
        if c0 > c1 || r0 > r1 {
            return None;
        }
        Some(CellWindow {
            c0: c0 as usize,
            r0: r0 as usize,
            c1: c1 as usize,
            r1: r1 as usize,
        })
    }
}

/// Inclusive rectangle of cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellWindow {
    pub c0: usize,
    pub r0: usize,
    pub c1: usize,
    pub r1: usize,
}

impl CellWindow {
    pub fn expand(self, by: usize, meta: &GridMeta) -> Self {
        Self {
            c0: self.c0.saturating_sub(by),
            r0: self.r0.saturating_sub(by),
            c1: (self.c1 + by).min(meta.width - 1),
            r1: (self.r1 + by).min(meta.height - 1),
        }
    }

    pub fn width(&self) -> usize {
        self.c1 - self.c0 + 1
    }

    pub fn height(&self) -> usize {
        self.r1 - self.r0 + 1
    }
}

/// Boolean raster, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct BitMask {
    meta: GridMeta,
    cells: Vec<bool>,
}

impl BitMask {
    pub fn empty(meta: GridMeta) -> Self {
        Self { meta, cells: vec![false; meta.len()] }
    }

    pub fn full(meta: GridMeta) -> Self {
        Self { meta, cells: vec![true; meta.len()] }
    }

    pub fn from_cells(meta: GridMeta, cells: Vec<bool>) -> Result<Self, RasterError> {
        if cells.len() != meta.len() {
            return Err(RasterError::DimensionMismatch { expected: meta.len(), got: cells.len() });
        }
        Ok(Self { meta, cells })
    }

    pub fn from_fn(meta: GridMeta, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut cells = Vec::with_capacity(meta.len());
        for row in 0..meta.height {
            for col in 0..meta.width {
                cells.push(f(col, row));
            }
        }
        Self { meta, cells }
    }

    /// Mask from the listed cell indices.
    pub fn from_indices(meta: GridMeta, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::empty(meta);
        for i in indices {
            m.cells[i] = true;
        }
        m
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.cells[self.meta.index(col, row)]
    }

    #[inline]
    pub fn get_index(&self, index: usize) -> bool {
        self.cells[index]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        let i = self.meta.index(col, row);
        self.cells[i] = value;
    }

    #[inline]
    pub fn set_index(&mut self, index: usize, value: bool) {
        self.cells[index] = value;
    }

    /// Number of true cells; areas throughout the planners are in these units.
    pub fn area_pixels(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn iter_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i)
    }

    pub fn bounding_window(&self) -> Option<CellWindow> {
        let mut w: Option<CellWindow> = None;
        for i in self.iter_indices() {
            let (c, r) = self.meta.col_row(i);
            w = Some(match w {
                None => CellWindow { c0: c, r0: r, c1: c, r1: r },
                Some(w) => CellWindow {
                    c0: w.c0.min(c),
                    r0: w.r0.min(r),
                    c1: w.c1.max(c),
                    r1: w.r1.max(r),
                },
            });
        }
        w
    }

    /// Mean world position of the true cells.
    pub fn centroid(&self) -> Option<Point> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for i in self.iter_indices() {
            let p = self.meta.center_of(i);
            sx += p.x;
            sy += p.y;
            n += 1;
        }
        (n > 0).then(|| Point::new(sx / n as f64, sy / n as f64))
    }

    fn check_meta(&self, other: &BitMask) -> Result<(), RasterError> {
        if self.meta != other.meta {
            return Err(RasterError::MetaMismatch);
        }
        Ok(())
    }

    pub fn union(&self, other: &BitMask) -> Result<BitMask, RasterError> {
        self.check_meta(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| a || b).collect();
        Ok(BitMask { meta: self.meta, cells })
    }

    /// Cells of `self` not in `other`.
    pub fn subtract(&self, other: &BitMask) -> Result<BitMask, RasterError> {
        self.check_meta(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| a && !b).collect();
        Ok(BitMask { meta: self.meta, cells })
    }

    pub fn is_subset_of(&self, other: &BitMask) -> bool {
        self.meta == other.meta && self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b)
    }

    pub fn union_in_place(&mut self, other: &BitMask) -> Result<(), RasterError> {
        self.check_meta(other)?;
        for (a, &b) in self.cells.iter_mut().zip(&other.cells) {
            *a |= b;
        }
        Ok(())
    }
}

/// Per-cell real values (heights in meters for the depth image).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    meta: GridMeta,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(meta: GridMeta) -> Self {
        Self { meta, values: vec![0.0; meta.len()] }
    }

    pub fn from_values(meta: GridMeta, values: Vec<f64>) -> Result<Self, RasterError> {
        if values.len() != meta.len() {
            return Err(RasterError::DimensionMismatch { expected: meta.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RasterError::NonFinite);
        }
        Ok(Self { meta, values })
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[self.meta.index(col, row)]
    }

    #[inline]
    pub fn get_index(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn set(&mut self, col: usize, row: usize, v: f64) {
        let i = self.meta.index(col, row);
        self.values[i] = v;
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Lowest row-major index attaining the maximum over the masked cells.
    pub fn argmax_within(&self, mask: &BitMask) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in mask.iter_indices() {
            let v = self.values[i];
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Ellipse footprint on the surface; `d1`/`d2` are full axis lengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipseSpec {
    pub cx: f64,
    pub cy: f64,
    pub theta: f64,
    pub d1: f64,
    pub d2: f64,
}

impl EllipseSpec {
    pub fn validate(&self) -> Result<(), RasterError> {
        let ok = self.d2 > 0.0
            && self.d1 >= self.d2
            && self.d1.is_finite()
            && self.cx.is_finite()
            && self.cy.is_finite()
            && (-FRAC_PI_2..=FRAC_PI_2).contains(&self.theta);
        if ok {
            Ok(())
        } else {
            Err(RasterError::InvalidEllipse(*self))
        }
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.d1 * self.d2 / 4.0
    }
}

/// Indices of the cells whose centers fall inside the ellipse.
///
/// This is the sparse form used on hot paths; [`rasterize_ellipse`] wraps it.
pub fn ellipse_cells(spec: &EllipseSpec, meta: &GridMeta) -> Vec<usize> {
    let a = spec.d1 / 2.0;
    let b = spec.d2 / 2.0;
    let center = Point::new(spec.cx, spec.cy);
    let Some(win) = meta.cell_window(
        Point::new(center.x - a, center.y - a),
        Point::new(center.x + a, center.y + a),
    ) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    // Circles skip the rotation so the test is exactly rotation invariant.
    let circle = spec.d1 == spec.d2;
    let (s, c) = spec.theta.sin_cos();
    let (ia2, ib2) = (1.0 / (a * a), 1.0 / (b * b));
    for row in win.r0..=win.r1 {
        for col in win.c0..=win.c1 {
            let p = meta.cell_center(col, row);
            let dx = p.x - center.x;
            let dy = p.y - center.y;
            let inside = if circle {
                dx * dx + dy * dy <= a * a
            } else {
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                u * u * ia2 + v * v * ib2 <= 1.0
            };
            if inside {
                out.push(meta.index(col, row));
            }
        }
    }
    out
}

/// Cells whose centers lie inside the ellipse; off-grid parts are dropped.
pub fn rasterize_ellipse(spec: &EllipseSpec, meta: &GridMeta) -> BitMask {
    BitMask::from_indices(*meta, ellipse_cells(spec, meta))
}

/// Cellwise AND.
pub fn intersect(a: &BitMask, b: &BitMask) -> Result<BitMask, RasterError> {
    a.check_meta(b)?;
    let cells = a.cells.iter().zip(&b.cells).map(|(&x, &y)| x && y).collect();
    Ok(BitMask { meta: a.meta, cells })
}

/// Two passes of an all-ones `kernel x kernel` box filter with majority
/// thresholding: a cell survives a pass iff at least half its window is set.
/// Closes small holes and removes speckle.
pub fn fill_holes(mask: &BitMask, kernel: usize) -> Result<BitMask, RasterError> {
    if kernel == 0 || kernel % 2 == 0 {
        return Err(RasterError::InvalidKernel(kernel));
    }
    let once = majority_pass(mask, kernel);
    Ok(majority_pass(&once, kernel))
}

fn majority_pass(mask: &BitMask, kernel: usize) -> BitMask {
    let meta = mask.meta;
    let Some(win) = mask.bounding_window() else {
        return BitMask::empty(meta);
    };
    let h = kernel / 2;
    let win = win.expand(h, &meta);
    // Summed-area table over the window plus a half-kernel apron.
    let ap = win.expand(h, &meta);
    let (aw, ah) = (ap.width(), ap.height());
    let mut sat = vec![0u32; (aw + 1) * (ah + 1)];
    for r in 0..ah {
        let mut run = 0u32;
        for c in 0..aw {
            run += mask.get(ap.c0 + c, ap.r0 + r) as u32;
            sat[(r + 1) * (aw + 1) + c + 1] = sat[r * (aw + 1) + c + 1] + run;
        }
    }
    let threshold2 = (kernel * kernel) as u32;
    let mut out = BitMask::empty(meta);
    for row in win.r0..=win.r1 {
        let r0 = row.saturating_sub(h).max(ap.r0) - ap.r0;
        let r1 = (row + h).min(ap.r1) - ap.r0 + 1;
        for col in win.c0..=win.c1 {
            let c0 = col.saturating_sub(h).max(ap.c0) - ap.c0;
            let c1 = (col + h).min(ap.c1) - ap.c0 + 1;
            let s = sat[r1 * (aw + 1) + c1] + sat[r0 * (aw + 1) + c0]
                - sat[r0 * (aw + 1) + c1]
                - sat[r1 * (aw + 1) + c0];
            // Cells beyond the grid edge count as unset.
            if 2 * s >= threshold2 {
                out.set(col, row, true);
            }
        }
    }
    out
}

/// Cells within Euclidean distance `r` (meters, center to center) of the mask.
pub fn dilate_within(mask: &BitMask, r: f64) -> Result<BitMask, RasterError> {
    if !(r >= 0.0) {
        return Err(RasterError::NegativeRadius(r));
    }
    let meta = mask.meta;
    let Some(win) = mask.bounding_window() else {
        return Ok(BitMask::empty(meta));
    };
    let reach = (r / meta.cell_size).floor() as usize;
    let win = win.expand(reach, &meta);
    let d2 = squared_distance_transform(mask, win);
    let limit = (r / meta.cell_size).powi(2) * (1.0 + 1e-12);
    let mut out = BitMask::empty(meta);
    let w = win.width();
    for (k, &d) in d2.iter().enumerate() {
        if d <= limit {
            out.set(win.c0 + k % w, win.r0 + k / w, true);
        }
    }
    Ok(out)
}

/// Exact squared Euclidean distance (in cells) to the nearest set cell,
/// evaluated over `win` (Felzenszwalb–Huttenlocher separable transform).
fn squared_distance_transform(mask: &BitMask, win: CellWindow) -> Vec<f64> {
    let (w, h) = (win.width(), win.height());
    let mut grid = vec![f64::INFINITY; w * h];
    for r in 0..h {
        for c in 0..w {
            if mask.get(win.c0 + c, win.r0 + r) {
                grid[r * w + c] = 0.0;
            }
        }
    }
    let mut f = vec![0.0; w.max(h)];
    let mut out = vec![0.0; w.max(h)];
    for c in 0..w {
        for r in 0..h {
            f[r] = grid[r * w + c];
        }
        edt_1d(&f[..h], &mut out[..h]);
        for r in 0..h {
            grid[r * w + c] = out[r];
        }
    }
    for r in 0..h {
        f[..w].copy_from_slice(&grid[r * w..(r + 1) * w]);
        edt_1d(&f[..w], &mut out[..w]);
        grid[r * w..(r + 1) * w].copy_from_slice(&out[..w]);
    }
    grid
}

fn edt_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let mut first = None;
    for q in 0..n {
        if f[q].is_finite() {
            first = Some(q);
            break;
        }
    }
    let Some(q0) = first else {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        return;
    };
    v[0] = q0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in q0 + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, dq) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let diff = q as f64 - p as f64;
        *dq = diff * diff + f[p];
    }
}

/// Result of [`local_pca_angle`]; `degenerate` is set when no orientation is
/// defined (too few cells or an isotropic neighbourhood) and `angle` is then 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcaAngle {
    pub angle: f64,
    pub degenerate: bool,
}

// Eigenvalue gap below this fraction of the trace counts as isotropic.
const PCA_GAP_TOL: f64 = 1e-9;

/// Orientation of the major principal axis of the height-weighted foreground
/// cells within `radius` of `center`, in `[-pi/2, pi/2]`.
pub fn local_pca_angle(field: &ScalarField, foreground: &BitMask, center: Point, radius: f64) -> PcaAngle {
    let meta = field.meta;
    let degenerate = PcaAngle { angle: 0.0, degenerate: true };
    let Some(win) = meta.cell_window(
        Point::new(center.x - radius, center.y - radius),
        Point::new(center.x + radius, center.y + radius),
    ) else {
        return degenerate;
    };
    let r2 = radius * radius;
    let mut pts = Vec::new();
    for row in win.r0..=win.r1 {
        for col in win.c0..=win.c1 {
            if !foreground.get(col, row) {
                continue;
            }
            let p = meta.cell_center(col, row);
            let (dx, dy) = (p.x - center.x, p.y - center.y);
            if dx * dx + dy * dy > r2 {
                continue;
            }
            let w = field.get(col, row);
            if w > 0.0 {
                pts.push((dx, dy, w));
            }
        }
    }
    if pts.len() < 2 {
        return degenerate;
    }
    let wsum: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / wsum;
    let my = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / wsum;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y, w) in &pts {
        let (x, y) = (x - mx, y - my);
        sxx += w * x * x;
        syy += w * y * y;
        sxy += w * x * y;
    }
    sxx /= wsum;
    syy /= wsum;
    sxy /= wsum;
    let gap = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    if gap <= PCA_GAP_TOL * (sxx + syy) {
        return degenerate;
    }
    PcaAngle { angle: wrap_half_pi(0.5 * (2.0 * sxy).atan2(sxx - syy)), degenerate: false }
}

/// Maps an undirected axis angle into `[-pi/2, pi/2]`.
pub fn wrap_half_pi(theta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut t = theta % pi;
    if t > FRAC_PI_2 {
        t -= pi;
    } else if t < -FRAC_PI_2 {
        t += pi;
    }
    t
}
