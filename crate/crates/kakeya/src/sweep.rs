//! Raster area oracle.
//!
//! Every swept region is a union of quadrilaterals `(a, b, b', a')`, one per
//! scene segment and motion sample interval. Each quadrilateral is filled as
//! two triangles, marking every cell the closed triangle touches, so the
//! occupied area over-estimates the true area by `O(h · perimeter)`. Running
//! at `h` and `h/2` gives an error band and a Richardson estimate.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blind::{Deletion, MotionPlan, PlanMode};
use crate::geom::{
    normal_slab_pieces, scene_slab, slab_mask, Bbox, Direction, ProjLine, Scene, Segment, Vec2,
};
use crate::se2::{Isometry, MotionSegment, Rot};
use crate::Error;

/// Default number of cells along the longer side of the coarse grid.
pub const DEFAULT_GRID_MAX: usize = 2048;

/// Placement of a grid: lower-left corner, cell size and cell counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Smallest grid with cell size `h` covering `bbox`, with one spare cell each side.
    pub fn covering(bbox: &Bbox, h: f64) -> Result<Self, Error> {
        if !(h > 0.0 && h.is_finite()) || !bbox.is_valid() {
            return Err(Error::InvalidInput("grid needs a valid box and positive cell size".into()));
        }
        let nx = (bbox.width() / h).ceil() as usize + 2;
        let ny = (bbox.height() / h).ceil() as usize + 2;
        if nx.saturating_mul(ny) > 1 << 32 {
            return Err(Error::InvalidInput(format!("grid {nx}x{ny} too large")));
        }
        Ok(GridSpec { origin: bbox.min - Vec2::new(h, h), h, nx, ny })
    }

    /// Like [`GridSpec::covering`], with the origin on the lattice `h·ℤ²`.
    pub fn snapped(bbox: &Bbox, h: f64) -> Result<Self, Error> {
        let g = Self::covering(bbox, h)?;
        let origin = Vec2::new((g.origin.x / h).floor() * h, (g.origin.y / h).floor() * h);
        Ok(GridSpec { origin, nx: g.nx + 1, ny: g.ny + 1, ..g })
    }

    /// Same box, cell size halved.
    pub fn refined(&self) -> Self {
        GridSpec { origin: self.origin, h: self.h / 2.0, nx: self.nx * 2, ny: self.ny * 2 }
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec2 {
        self.origin + Vec2::new((ix as f64 + 0.5) * self.h, (iy as f64 + 0.5) * self.h)
    }

    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.h).floor();
        let fy = ((p.y - self.origin.y) / self.h).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }
}

/// Occupancy bitmask over a [`GridSpec`]. Rows carry at least one spare bit.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterGrid {
    spec: GridSpec,
    words: usize,
    bits: Vec<u64>,
}

impl RasterGrid {
    pub fn new(spec: GridSpec) -> Self {
        let words = spec.nx / 64 + 1;
        RasterGrid { spec, words, bits: vec![0; words * spec.ny] }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }

    pub fn get(&self, ix: usize, iy: usize) -> bool {
        self.bits[iy * self.words + ix / 64] >> (ix % 64) & 1 == 1
    }

    pub fn set(&mut self, ix: usize, iy: usize) {
        self.bits[iy * self.words + ix / 64] |= 1 << (ix % 64);
    }

    pub fn contains_point(&self, p: Vec2) -> bool {
        self.spec.cell_of(p).is_some_and(|(x, y)| self.get(x, y))
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn area(&self) -> f64 {
        self.count() as f64 * self.spec.h * self.spec.h
    }

    /// Bitwise union. Both grids must share a spec.
    pub fn union_with(&mut self, o: &RasterGrid) {
        assert_eq!(self.spec, o.spec, "union of grids with different specs");
        for (a, b) in self.bits.iter_mut().zip(&o.bits) {
            *a |= *b;
        }
    }

    /// ORs in `src` moved by `(dx, dy)` cells; the two grids share a cell size.
    pub fn stamp(&mut self, src: &RasterGrid, dx: i64, dy: i64) {
        for iy in 0..src.spec.ny {
            let ty = iy as i64 + dy;
            if ty < 0 || ty >= self.spec.ny as i64 {
                continue;
            }
            for (wi, &w) in src.row(iy).iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    let tx = (wi * 64 + b) as i64 + dx;
                    if tx >= 0 && tx < self.spec.nx as i64 {
                        self.set(tx as usize, ty as usize);
                    }
                }
            }
        }
    }

    fn row(&self, iy: usize) -> &[u64] {
        &self.bits[iy * self.words..(iy + 1) * self.words]
    }

    fn set_span(&mut self, iy: usize, x0: usize, x1: usize) {
        let row = &mut self.bits[iy * self.words..(iy + 1) * self.words];
        let (w0, w1) = (x0 / 64, x1 / 64);
        let lo = !0u64 << (x0 % 64);
        let hi = !0u64 >> (63 - x1 % 64);
        if w0 == w1 {
            row[w0] |= lo & hi;
        } else {
            row[w0] |= lo;
            for w in &mut row[w0 + 1..w1] {
                *w = !0;
            }
            row[w1] |= hi;
        }
    }

    /// Marks every cell meeting the closed triangle `abc` (degenerate ones included).
    pub fn fill_triangle(&mut self, a: Vec2, b: Vec2, c: Vec2) {
        let s = self.spec;
        let ymin = a.y.min(b.y).min(c.y);
        let ymax = a.y.max(b.y).max(c.y);
        let r0 = ((ymin - s.origin.y) / s.h).floor().max(0.0);
        let r1 = ((ymax - s.origin.y) / s.h).floor().min(s.ny as f64 - 1.0);
        if !(r0 <= r1) {
            return;
        }
        let edges = [(a, b), (b, c), (c, a)];
        for iy in r0 as usize..=r1 as usize {
            let y0 = (s.origin.y + iy as f64 * s.h).max(ymin);
            let y1 = (s.origin.y + (iy + 1) as f64 * s.h).min(ymax);
            let (mut xl, mut xr) = (f64::INFINITY, f64::NEG_INFINITY);
            for &(p, q) in &edges {
                let (lo, hi) = if p.y <= q.y { (p, q) } else { (q, p) };
                if hi.y < y0 || lo.y > y1 {
                    continue;
                }
                let dy = hi.y - lo.y;
                let (xa, xb) = if dy <= 0.0 {
                    (lo.x, hi.x)
                } else {
                    let ta = ((y0 - lo.y) / dy).clamp(0.0, 1.0);
                    let tb = ((y1 - lo.y) / dy).clamp(0.0, 1.0);
                    (lo.x + (hi.x - lo.x) * ta, lo.x + (hi.x - lo.x) * tb)
                };
                xl = xl.min(xa.min(xb));
                xr = xr.max(xa.max(xb));
            }
            if xl > xr {
                continue;
            }
            let c0 = ((xl - s.origin.x) / s.h).floor().max(0.0);
            let c1 = ((xr - s.origin.x) / s.h).floor().min(s.nx as f64 - 1.0);
            if c0 <= c1 {
                self.set_span(iy, c0 as usize, c1 as usize);
            }
        }
    }

    /// Cells swept by segment `ab` moving linearly to `a'b'`.
    pub fn fill_quad(&mut self, a: Vec2, b: Vec2, b2: Vec2, a2: Vec2) {
        self.fill_triangle(a, b, b2);
        self.fill_triangle(a, b2, a2);
    }

    /// Exposed cell faces times `h`.
    pub fn boundary_length(&self) -> f64 {
        let mut faces = 0u64;
        let zero = vec![0u64; self.words];
        for iy in 0..=self.spec.ny {
            let cur = if iy < self.spec.ny { self.row(iy) } else { &zero[..] };
            let prev = if iy > 0 { self.row(iy - 1) } else { &zero[..] };
            let mut carry = 0u64;
            for w in 0..self.words {
                faces += (cur[w] ^ prev[w]).count_ones() as u64;
                let shifted = (cur[w] << 1) | carry;
                carry = cur[w] >> 63;
                faces += (cur[w] ^ shifted).count_ones() as u64;
            }
        }
        faces as f64 * self.spec.h
    }

    /// Morphological dilation by a disk of radius `r` (cell-center metric),
    /// on a grid enlarged so nothing is clipped.
    pub fn dilate(&self, r: f64) -> RasterGrid {
        let k = (r / self.spec.h).floor().max(0.0) as usize;
        let spec = GridSpec {
            origin: self.spec.origin - Vec2::new(k as f64 * self.spec.h, k as f64 * self.spec.h),
            h: self.spec.h,
            nx: self.spec.nx + 2 * k,
            ny: self.spec.ny + 2 * k,
        };
        let mut src = RasterGrid::new(spec);
        for iy in 0..self.spec.ny {
            let row = shift_up(self.row(iy), k, src.words);
            src.bits[(iy + k) * src.words..(iy + k + 1) * src.words].copy_from_slice(&row);
        }
        if k == 0 {
            return src;
        }
        let kk = r / self.spec.h;
        let mut out = RasterGrid::new(spec);
        let words = out.words;
        out.bits.par_chunks_mut(words).enumerate().for_each(|(iy, dst)| {
            for dy in -(k as i64)..=(k as i64) {
                let sy = iy as i64 + dy;
                if sy < 0 || sy >= spec.ny as i64 {
                    continue;
                }
                let half = (kk * kk - (dy * dy) as f64).max(0.0).sqrt().floor() as usize;
                let srow = &src.bits[sy as usize * words..(sy as usize + 1) * words];
                let d = dilate_row(srow, half, spec.nx);
                for (a, b) in dst.iter_mut().zip(&d) {
                    *a |= *b;
                }
            }
        });
        out
    }

    /// Rows from top to bottom, `true` for occupied.
    pub fn rows_top_down(&self) -> impl Iterator<Item = Vec<bool>> + '_ {
        (0..self.spec.ny).rev().map(move |iy| (0..self.spec.nx).map(|ix| self.get(ix, iy)).collect())
    }
}

/// Row shifted towards higher indices by `k` bits, resized to `words`.
fn shift_up(row: &[u64], k: usize, words: usize) -> Vec<u64> {
    let mut out = vec![0u64; words];
    let (ws, bs) = (k / 64, k % 64);
    for (i, &w) in row.iter().enumerate() {
        if w == 0 {
            continue;
        }
        if i + ws < words {
            out[i + ws] |= w << bs;
        }
        if bs > 0 && i + ws + 1 < words {
            out[i + ws + 1] |= w >> (64 - bs);
        }
    }
    out
}

fn shift_down(row: &[u64], k: usize) -> Vec<u64> {
    let words = row.len();
    let mut out = vec![0u64; words];
    let (ws, bs) = (k / 64, k % 64);
    for i in ws..words {
        let w = row[i];
        out[i - ws] |= w >> bs;
        if bs > 0 && i > ws {
            out[i - ws - 1] |= w << (64 - bs);
        }
    }
    out
}

fn dilate_row(row: &[u64], d: usize, nx: usize) -> Vec<u64> {
    let mut cur = row.to_vec();
    let mut covered = 0;
    let mut step = 1;
    while covered < d {
        let s = step.min(d - covered);
        let up = shift_up(&cur, s, cur.len());
        let down = shift_down(&cur, s);
        for ((c, u), dn) in cur.iter_mut().zip(&up).zip(&down) {
            *c |= *u | *dn;
        }
        covered += s;
        step *= 2;
    }
    let last = nx / 64;
    cur[last] &= (1u64 << (nx % 64)) - 1;
    for w in &mut cur[last + 1..] {
        *w = 0;
    }
    cur
}

/// Two-resolution area measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    /// Richardson estimate `2·fine − coarse`, clamped to `[fine − u, max(fine, coarse)]`.
    pub estimate: f64,
    pub uncertainty: f64,
    pub coarse: f64,
    pub fine: f64,
    /// Coarse cell size; the fine run uses `h/2`.
    pub h: f64,
    pub cells: u64,
    pub segments_filled: u64,
    /// Wall time; not serialized so reports stay reproducible.
    #[serde(skip)]
    pub elapsed_ms: f64,
}

impl AreaReport {
    pub fn from_pair(coarse: f64, fine: f64, h: f64) -> Self {
        let u = (coarse - fine).abs();
        let lo = (fine - u).max(0.0);
        let hi = fine.max(coarse);
        AreaReport {
            estimate: (2.0 * fine - coarse).clamp(lo, hi),
            uncertainty: u,
            coarse,
            fine,
            h,
            cells: 0,
            segments_filled: 0,
            elapsed_ms: 0.0,
        }
    }

    pub fn zero(h: f64) -> Self {
        Self::from_pair(0.0, 0.0, h)
    }

    /// Largest value consistent with the report.
    pub fn upper(&self) -> f64 {
        self.estimate + self.uncertainty
    }
}

/// Raster controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Cells along the longer side of the coarse grid.
    pub grid_max: usize,
    /// Fixed coarse grid box; by default the sweep's own bounding box.
    pub bbox: Option<Bbox>,
    /// Copies of the whole sweep translated by each offset (empty means one copy at 0).
    pub offsets: Vec<Vec2>,
    /// Apply per-leaf deletions of a plan.
    pub deletion: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { grid_max: DEFAULT_GRID_MAX, bbox: None, offsets: vec![], deletion: true }
    }
}

impl SweepOptions {
    pub fn with_grid(grid_max: usize) -> Self {
        SweepOptions { grid_max, ..Default::default() }
    }
}

/// One run of `mult` consecutive copies of `gen`, starting at `start`,
/// applied to segment set `set`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepItem {
    pub start: Isometry,
    pub gen: Rot,
    pub mult: u64,
    pub set: usize,
}

/// Everything the rasterizer needs: segment sets in scene coordinates and the motions.
#[derive(Clone, Debug, Default)]
pub struct SweepInput {
    pub sets: Vec<Vec<Segment>>,
    pub items: Vec<SweepItem>,
}

impl SweepInput {
    /// One set, one motion list.
    pub fn motions(segments: &[Segment], motions: &[MotionSegment]) -> Self {
        SweepInput {
            sets: vec![segments.to_vec()],
            items: motions
                .iter()
                .map(|m| SweepItem { start: m.start, gen: m.gen, mult: 1, set: 0 })
                .collect(),
        }
    }

    /// Scene swept by a plan, with per-leaf deletions when `deletion` is set.
    pub fn plan(scene: &Scene, plan: &MotionPlan, deletion: bool) -> Self {
        let mut sets = Vec::new();
        let mut set_of_leaf = vec![usize::MAX; plan.leaves.len()];
        if !deletion {
            sets.push(scene.segments().to_vec());
        }
        let line = match &plan.mode {
            PlanMode::Rotation { line, .. } => Some(line),
            PlanMode::Translation => None,
        };
        let mut items = Vec::with_capacity(plan.steps.len());
        let mut g = Isometry::IDENTITY;
        for st in &plan.steps {
            let set = if deletion {
                let l = st.leaf as usize;
                if set_of_leaf[l] == usize::MAX {
                    set_of_leaf[l] = sets.len();
                    sets.push(kept_segments(scene, &plan.leaves[l].deletion, line));
                }
                set_of_leaf[l]
            } else {
                0
            };
            items.push(SweepItem { start: g, gen: st.x, mult: st.mult, set });
            let m = st.x.map();
            if st.x.phi == 0.0 {
                g.v += m.v.rotate(g.phi) * st.mult as f64;
            } else {
                for _ in 0..st.mult {
                    g = g.compose(&m);
                }
            }
        }
        SweepInput { sets, items }
    }

    /// Appends `other`, pre-composing its motions with `start`.
    pub fn append(&mut self, other: SweepInput, start: &Isometry) {
        let base = self.sets.len();
        self.sets.extend(other.sets);
        self.items.extend(other.items.into_iter().map(|it| SweepItem {
            start: start.compose(&it.start),
            set: it.set + base,
            ..it
        }));
    }

    /// Post-composes every motion with `g`.
    pub fn transformed(&self, g: &Isometry) -> Self {
        SweepInput {
            sets: self.sets.clone(),
            items: self
                .items
                .iter()
                .map(|it| SweepItem { start: g.compose(&it.start), ..*it })
                .collect(),
        }
    }

    fn radius(&self) -> f64 {
        self.sets
            .iter()
            .flatten()
            .map(|s| s.a.norm().max(s.b.norm()))
            .fold(0.0, f64::max)
    }

    fn set_boxes(&self) -> Vec<Bbox> {
        self.sets
            .iter()
            .map(|set| {
                let mut b = Bbox::empty();
                for s in set {
                    b.include(s.a);
                    b.include(s.b);
                }
                b
            })
            .collect()
    }

    /// Outer box of the swept region (one copy, no offsets).
    pub fn bbox(&self) -> Bbox {
        let boxes = self.set_boxes();
        let r = self.radius();
        let mut out = Bbox::empty();
        for it in &self.items {
            let b = boxes[it.set];
            if !b.is_valid() {
                continue;
            }
            let corners = [b.min, b.max, Vec2::new(b.min.x, b.max.y), Vec2::new(b.max.x, b.min.y)];
            let m = it.gen.map();
            if it.gen.phi == 0.0 {
                let end = Isometry { phi: it.start.phi, v: it.start.v + m.v.rotate(it.start.phi) * it.mult as f64 };
                for g in [it.start, end] {
                    for c in corners {
                        out.include(g.apply(c));
                    }
                }
                continue;
            }
            let speed = it.gen.point_speed(r);
            let sag = (speed * it.gen.phi.abs() / 8.0).min(2.0 * speed / it.gen.phi.abs());
            let mut g = it.start;
            let mut part = Bbox::empty();
            for _ in 0..it.mult {
                for c in corners {
                    part.include(g.apply(c));
                }
                g = g.compose(&m);
            }
            for c in corners {
                part.include(g.apply(c));
            }
            out = out.union(&part.pad(sag));
        }
        out
    }
}

/// Segments of `scene` left after removing a deletion slab. Normal
/// deletions need the plan's line `ℓ`; without one nothing is removed.
pub fn kept_segments(scene: &Scene, deletion: &Deletion, line: Option<&ProjLine>) -> Vec<Segment> {
    match (*deletion, line) {
        (Deletion::Tangent { center, radius }, _) => {
            let mask = slab_mask(scene, center, radius);
            scene.segments().iter().zip(mask).filter(|(_, m)| !m).map(|(s, _)| *s).collect()
        }
        (Deletion::Normal { u, radius }, Some(l)) => normal_slab_pieces(scene, l, &u, radius)
            .1
            .iter()
            .map(|p| scene.segments()[p.seg].sub(p.t0, p.t1))
            .collect(),
        (Deletion::Normal { .. }, None) => scene.segments().to_vec(),
    }
}

/// Rasterizes `input` onto a grid with spec `spec`.
pub fn rasterize(input: &SweepInput, spec: GridSpec, offsets: &[Vec2]) -> (RasterGrid, u64) {
    let r = input.radius();
    let step = spec.h / 4.0;
    let zero = [Vec2::ZERO];
    let offsets = if offsets.is_empty() { &zero[..] } else { offsets };
    input
        .items
        .par_iter()
        .fold(
            || (RasterGrid::new(spec), 0u64),
            |(mut grid, mut n), it| {
                let set = &input.sets[it.set];
                if set.is_empty() {
                    return (grid, n);
                }
                let m = it.gen.map();
                let mut fill = |g0: &Isometry, g1: &Isometry| {
                    for off in offsets {
                        for s in set {
                            let (a0, b0) = (g0.apply(s.a) + *off, g0.apply(s.b) + *off);
                            let (a1, b1) = (g1.apply(s.a) + *off, g1.apply(s.b) + *off);
                            grid.fill_quad(a0, b0, b1, a1);
                        }
                    }
                    n += (set.len() * offsets.len()) as u64;
                };
                if it.gen.phi == 0.0 {
                    let end = Isometry {
                        phi: it.start.phi,
                        v: it.start.v + m.v.rotate(it.start.phi) * it.mult as f64,
                    };
                    fill(&it.start, &end);
                } else {
                    let mut g = it.start;
                    for _ in 0..it.mult {
                        let seg = MotionSegment { start: g, gen: it.gen };
                        let samples = seg.samples(step, r);
                        for w in samples.windows(2) {
                            fill(&w[0], &w[1]);
                        }
                        g = g.compose(&m);
                    }
                }
                (grid, n)
            },
        )
        .reduce(
            || (RasterGrid::new(spec), 0),
            |(mut a, na), (b, nb)| {
                a.union_with(&b);
                (a, na + nb)
            },
        )
}

/// Coarse grid spec for `input` under `opts`.
pub fn coarse_spec(input: &SweepInput, opts: &SweepOptions) -> Result<GridSpec, Error> {
    let bbox = match opts.bbox {
        Some(b) => b,
        None => {
            let b = input.bbox();
            if opts.offsets.is_empty() {
                b
            } else {
                let mut o = Bbox::empty();
                for off in &opts.offsets {
                    o.include(b.min + *off);
                    o.include(b.max + *off);
                }
                o
            }
        }
    };
    if !bbox.is_valid() {
        return Err(Error::InvalidInput("empty sweep".into()));
    }
    let ext = bbox.width().max(bbox.height());
    let h = if ext > 0.0 { ext / opts.grid_max.max(1) as f64 } else { 1e-3 };
    GridSpec::covering(&bbox, h)
}

/// Area of the region swept by `input`, measured at `h` and `h/2`.
pub fn measure(input: &SweepInput, opts: &SweepOptions) -> Result<AreaReport, Error> {
    let t0 = Instant::now();
    if input.items.is_empty() || input.sets.iter().all(|s| s.is_empty()) {
        return Ok(AreaReport::zero(0.0));
    }
    for s in input.sets.iter().flatten() {
        if !(s.a.is_finite() && s.b.is_finite()) {
            return Err(Error::InvalidInput("non-finite scene point".into()));
        }
    }
    for it in &input.items {
        if !(it.gen.w.is_finite() && it.gen.phi.is_finite() && it.start.v.is_finite()) {
            return Err(Error::InvalidInput("non-finite motion".into()));
        }
    }
    let spec = coarse_spec(input, opts)?;
    let (coarse, n0) = rasterize(input, spec, &opts.offsets);
    let (fine, n1) = rasterize(input, spec.refined(), &opts.offsets);
    let mut rep = AreaReport::from_pair(coarse.area(), fine.area(), spec.h);
    rep.cells = coarse.count();
    rep.segments_filled = n0 + n1;
    rep.elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(rep)
}

/// A cell size at most `h0` dividing every coordinate of every shift, if
/// the shifts sit on a common square lattice.
pub fn lattice_cell(shifts: &[Vec2], h0: f64) -> Option<f64> {
    let comps: Vec<f64> = shifts.iter().flat_map(|q| [q.x.abs(), q.y.abs()]).filter(|c| *c > 1e-12).collect();
    let Some(s) = comps.iter().copied().reduce(f64::min) else { return Some(h0) };
    let on_lattice = comps.iter().all(|c| ((c / s) - (c / s).round()).abs() < 1e-9);
    on_lattice.then(|| s / (s / h0).ceil())
}

/// Union of `input` shifted by each of `shifts` on a lattice-aligned grid
/// over `target`: one raster, then whole-cell copies. `h` must divide every
/// shift coordinate.
pub fn stamped_grid(input: &SweepInput, shifts: &[Vec2], target: &Bbox, h: f64) -> Result<RasterGrid, Error> {
    let bspec = GridSpec::snapped(&input.bbox(), h)?;
    let base = rasterize(input, bspec, &[]).0;
    let tspec = GridSpec::snapped(target, h)?;
    let mut out = RasterGrid::new(tspec);
    for q in shifts {
        let fx = (bspec.origin.x + q.x - tspec.origin.x) / h;
        let fy = (bspec.origin.y + q.y - tspec.origin.y) / h;
        if (fx - fx.round()).abs() > 1e-6 || (fy - fy.round()).abs() > 1e-6 {
            return Err(Error::InvalidInput("shift is not a whole number of cells".into()));
        }
        out.stamp(&base, fx.round() as i64, fy.round() as i64);
    }
    Ok(out)
}

/// [`measure`] of the union of shifted copies, stamping when the shifts lie on a lattice.
pub fn measure_shifted(input: &SweepInput, shifts: &[Vec2], grid_max: usize) -> Result<AreaReport, Error> {
    let opts = SweepOptions { grid_max, offsets: shifts.to_vec(), ..Default::default() };
    if input.items.is_empty() || shifts.is_empty() {
        return measure(input, &opts);
    }
    let spec = coarse_spec(input, &opts)?;
    let Some(h) = lattice_cell(shifts, spec.h) else { return measure(input, &opts) };
    let t0 = Instant::now();
    let b = input.bbox();
    let mut target = Bbox::empty();
    for q in shifts {
        target.include(b.min + *q);
        target.include(b.max + *q);
    }
    let coarse = stamped_grid(input, shifts, &target, h)?;
    let fine = stamped_grid(input, shifts, &target, h / 2.0)?;
    let mut rep = AreaReport::from_pair(coarse.area(), fine.area(), h);
    rep.cells = coarse.count();
    rep.elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(rep)
}

/// The coarse grid of a sweep, for export and dilation.
pub fn sweep_grid(input: &SweepInput, opts: &SweepOptions) -> Result<RasterGrid, Error> {
    let spec = coarse_spec(input, opts)?;
    Ok(rasterize(input, spec, &opts.offsets).0)
}

/// Area swept by `scene` along `plan`, each step with its leaf's deletion removed.
pub fn sweep_area(scene: &Scene, plan: &MotionPlan, opts: &SweepOptions) -> Result<AreaReport, Error> {
    measure(&plan_input(scene, plan, opts.deletion), opts)
}

/// Sweep input for a plan.
pub fn plan_input(scene: &Scene, plan: &MotionPlan, deletion: bool) -> SweepInput {
    SweepInput::plan(scene, plan, deletion)
}

/// Area over `δ·H¹(R)·|y|`, or `None` when the filtered set is empty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub delta: f64,
    pub area: AreaReport,
    pub ratio: Option<f64>,
    /// Length of the filtered set.
    pub filtered_length: f64,
    /// `|φ|∫ dist(ν_x, z) dH¹(x)` over the filtered set (rotation checks only).
    pub quadrature: Option<f64>,
}

/// Translates the tangent slab `{θ_x ∈ B(θ, δ)}` by `v` and measures it.
pub fn verify_lemma_31(scene: &Scene, theta: Direction, delta: f64, v: Vec2, grid_max: usize) -> Result<RatioReport, Error> {
    if !(delta > 0.0) || !v.is_finite() {
        return Err(Error::InvalidInput("delta must be positive and v finite".into()));
    }
    let slab = scene_slab(scene, theta, delta);
    let motion = MotionSegment { start: Isometry::IDENTITY, gen: Rot::translation(v) };
    ratio_report(scene, slab.segments(), &[motion], delta, v.norm(), grid_max, None)
}

/// Points whose normal line passes within `delta` of `z`, split at the exact boundary.
pub fn normal_ball_segments(scene: &Scene, z: Vec2, delta: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    for s in scene.segments() {
        let tau = s.dir.unit();
        // dist(z, ν_{x(t)}) = |c0 − t·len|
        let c0 = (z - s.a).dot(tau);
        let (lo, hi) = ((c0 - delta) / s.len, (c0 + delta) / s.len);
        let (t0, t1) = (lo.max(0.0), hi.min(1.0));
        if t1 > t0 {
            out.push(s.sub(t0, t1));
        }
    }
    out
}

/// `|φ|∫ dist(ν_x, z)` over `segs`, exact for straight pieces. For a
/// translation, `∫ |v × τ_x|` instead.
pub fn lemma33_quadrature(segs: &[Segment], rot: &Rot) -> f64 {
    match rot.center() {
        Some(z) => {
            let mut acc = 0.0;
            for s in segs {
                let tau = s.dir.unit();
                let c0 = (z - s.a).dot(tau);
                acc += abs_linear_integral(c0, c0 - s.len) * s.len;
            }
            rot.phi.abs() * acc
        }
        None => {
            let v = rot.v();
            segs.iter().map(|s| v.cross(s.dir.unit()).abs() * s.len).sum()
        }
    }
}

/// `∫₀¹ |p + (q − p)t| dt`.
fn abs_linear_integral(p: f64, q: f64) -> f64 {
    if p * q >= 0.0 {
        (p.abs() + q.abs()) / 2.0
    } else {
        (p * p + q * q) / (2.0 * (p - q).abs())
    }
}

/// Filters by `ν_x ∩ B(z, δ) ≠ ∅` with `z` the center of `rot`, then sweeps by `rot`.
/// A translation uses the tangent slab in the direction of its motion.
pub fn verify_lemma_33(scene: &Scene, rot: &Rot, delta: f64, grid_max: usize) -> Result<RatioReport, Error> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    if rot.is_identity() {
        return Err(Error::Precondition("identity motion has no center".into()));
    }
    let segs = match rot.center() {
        Some(z) => normal_ball_segments(scene, z, delta),
        None => scene_slab(scene, Direction::of(rot.v()), delta).segments().to_vec(),
    };
    let motion = MotionSegment { start: Isometry::IDENTITY, gen: *rot };
    let q = lemma33_quadrature(&segs, rot);
    ratio_report(scene, &segs, &[motion], delta, rot.norm(), grid_max, Some(q))
}

fn ratio_report(
    scene: &Scene,
    segs: &[Segment],
    motions: &[MotionSegment],
    delta: f64,
    y: f64,
    grid_max: usize,
    quadrature: Option<f64>,
) -> Result<RatioReport, Error> {
    let filtered_length: f64 = segs.iter().map(|s| s.len).sum();
    if segs.is_empty() {
        return Ok(RatioReport { delta, area: AreaReport::zero(0.0), ratio: None, filtered_length, quadrature });
    }
    let area = measure(&SweepInput::motions(segs, motions), &SweepOptions::with_grid(grid_max))?;
    let denom = delta * scene.total_length() * y;
    let ratio = if denom > 0.0 { Some(area.estimate / denom) } else { None };
    Ok(RatioReport { delta, area, ratio, filtered_length, quadrature })
}

/// Dilation check for the small-neighborhood property.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodReport {
    pub eta: f64,
    pub base: f64,
    pub inflated: f64,
    pub boundary: f64,
    /// `base + 2η·boundary`.
    pub predicted: f64,
    /// `inflated − predicted`, the second-order remainder.
    pub remainder: f64,
}

/// Dilates the coarse raster of a sweep by `eta` and compares with the perimeter formula.
pub fn verify_small_neighborhood(input: &SweepInput, eta: f64, opts: &SweepOptions) -> Result<NeighborhoodReport, Error> {
    let grid = sweep_grid(input, opts)?;
    if eta > 0.0 && eta < grid.h() {
        return Err(Error::Precondition(format!("eta {eta} below cell size {}", grid.h())));
    }
    Ok(neighborhood_of_grid(&grid, eta))
}

pub fn neighborhood_of_grid(grid: &RasterGrid, eta: f64) -> NeighborhoodReport {
    let base = grid.area();
    let boundary = grid.boundary_length();
    let inflated = if eta > 0.0 { grid.dilate(eta).area() } else { base };
    let predicted = base + 2.0 * eta * boundary;
    NeighborhoodReport { eta, base, inflated, boundary, predicted, remainder: inflated - predicted }
}

/// Area over `H¹(E)·Σ|y_j|` (with `|y| = |v|` for translations).
pub fn trivial_sweep_bound(scene: &Scene, motions: &[MotionSegment], grid_max: usize) -> Result<(AreaReport, f64), Error> {
    let area = measure(&SweepInput::motions(scene.segments(), motions), &SweepOptions::with_grid(grid_max))?;
    let len: f64 = motions.iter().map(|m| m.gen.norm()).sum();
    let denom = scene.total_length() * len;
    Ok((area, if denom > 0.0 { area.estimate / denom } else { 0.0 }))
}
