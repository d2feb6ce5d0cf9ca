//! Finite-depth Besicovitch and Nikodym approximants.
//!
//! Level `n` runs one motion plan per segment of the base path `P0` with
//! budget `ε_n = eps0·2^{−n}` split evenly over the segments. A run records
//! the plans of every level, the deletion ball each sampled path point sees
//! at each level, and how far each level's path strays from the previous one.

use crate::blind::{
    build_rotation_plan, build_translation_plan, Deletion, MotionPlan, PlanMode, PlanOptions, Stop,
};
use crate::geom::{proj_distance, proj_embed, slab_mask, normal_slab_pieces, Bbox, ProjLine, ProjPoint, Scene, Vec2};
use crate::se2::{Isometry, Rot};
use crate::sweep::{
    coarse_spec, lattice_cell, measure, measure_shifted, rasterize, stamped_grid, AreaReport, GridSpec, RasterGrid, SweepInput,
    SweepOptions,
};
use crate::Error;
use serde::{Deserialize, Serialize};

/// Cap on candidate points in concurrency detection.
pub const CONCURRENCY_CANDIDATES: usize = 10_000;

/// `eps0·2^{−n}`.
pub fn level_eps(eps0: f64, n: u32) -> f64 {
    eps0 * 0.5f64.powi(n as i32)
}

/// Controls shared by both run kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitOptions {
    pub plan: PlanOptions,
    pub grid_max: usize,
    /// Sampled path points per base segment.
    pub samples: usize,
    /// Level `n` uses depth cap `n·d` and truncates there.
    pub depth_per_level: Option<u32>,
    /// Skip the raster measurements (plans and ball records only).
    pub measure: bool,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            plan: PlanOptions::default(),
            grid_max: 1024,
            samples: 16,
            depth_per_level: None,
            measure: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RunMode {
    Translation,
    Rotation { line: ProjLine },
}

/// Center of a recorded deletion ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BallCenter {
    /// A direction angle in `[0, π)`.
    Direction(f64),
    /// A point of `ℓ`.
    Point(ProjPoint),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub level: u32,
    pub center: BallCenter,
    pub radius: f64,
}

/// Deleted part of the scene at one path point of one level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeletedSet {
    pub length: f64,
    pub components: usize,
}

/// One sampled path point: its ball at each level and what that ball deletes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// Fraction of the base path, in `[0, 1]`.
    pub s: f64,
    pub balls: Vec<Ball>,
    pub deleted: Vec<DeletedSet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub n: u32,
    pub eps: f64,
    /// Budget of each per-segment plan.
    pub sub_eps: f64,
    #[serde(skip)]
    pub plans: Vec<MotionPlan>,
    #[serde(skip)]
    pub starts: Vec<Isometry>,
    pub steps: u64,
    pub leaves: usize,
    pub truncated_leaves: usize,
    pub certified_budget: f64,
    pub area: Option<AreaReport>,
    /// Raster boundary length of the level's sweep.
    pub boundary: Option<f64>,
    /// One-sided distance from this level's path to the previous level's path.
    pub nesting_deviation: Option<f64>,
    /// `ε_n / (2·boundary_{n−1})`, the previous level's neighborhood budget.
    pub nesting_budget: Option<f64>,
    /// Largest deleted length over all path points.
    pub max_deleted_length: f64,
    pub max_components: usize,
}

impl LevelRecord {
    pub fn nested(&self) -> Option<bool> {
        Some(self.nesting_deviation? <= self.nesting_budget?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesicovitchRun {
    pub mode: RunMode,
    pub depth: u32,
    pub eps: Vec<f64>,
    pub levels: Vec<LevelRecord>,
    pub samples: Vec<SampleRecord>,
    pub exceptional: Vec<Vec2>,
    /// Balls at some level that contain an exceptional point.
    pub exceptional_hits: usize,
    /// Consecutive recorded balls that fail to nest.
    pub ball_nesting_failures: usize,
    /// `Σ_{n≤D} ε_n`.
    pub tail_budget: f64,
}

impl BesicovitchRun {
    pub fn last(&self) -> &LevelRecord {
        self.levels.last().expect("a run has at least one level")
    }

    /// Sweep input of one level, scene `scene`, with or without deletions.
    pub fn level_input(&self, level: usize, scene: &Scene, deletion: bool) -> SweepInput {
        let lv = &self.levels[level];
        let mut input = SweepInput::default();
        for (p, g) in lv.plans.iter().zip(&lv.starts) {
            input.append(SweepInput::plan(scene, p, deletion), g);
        }
        input
    }

    /// Level areas in order, `None` where unmeasured.
    pub fn areas(&self) -> Vec<Option<f64>> {
        self.levels.iter().map(|l| l.area.map(|a| a.estimate)).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        let a = self.areas();
        a.windows(2).all(|w| matches!((w[0], w[1]), (Some(x), Some(y)) if y < x))
    }

    /// Level-`D` area is within the tail budget.
    pub fn certified(&self) -> bool {
        self.last().area.map(|a| a.estimate <= self.tail_budget + a.uncertainty).unwrap_or(false)
    }

    /// Max deleted length per level, for the smallness check.
    pub fn max_deleted(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.max_deleted_length).collect()
    }
}

fn level_options(opts: &LimitOptions, n: u32) -> PlanOptions {
    let mut p = opts.plan;
    if let Some(d) = opts.depth_per_level {
        p.schedule.depth_cap = d * n;
        p.schedule.truncate = true;
    }
    p
}

/// Runs `D` levels of translation plans along the polyline `p0`.
pub fn besicovitch_translation(
    scene: &Scene,
    p0: &[Vec2],
    eps0: f64,
    depth: u32,
    opts: &LimitOptions,
) -> Result<BesicovitchRun, Error> {
    check_common(scene, eps0, depth)?;
    if p0.len() < 2 || p0.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("base path needs two finite points".into()));
    }
    let legs: Vec<(Vec2, Vec2)> = p0.windows(2).map(|w| (w[0], w[1] - w[0])).filter(|(_, v)| v.norm() > 0.0).collect();
    if legs.is_empty() {
        return Err(Error::InvalidInput("base path has zero length".into()));
    }
    let starts: Vec<Isometry> = legs.iter().map(|(a, _)| Isometry { phi: 0.0, v: *a }).collect();
    let build = |n: u32, sub: f64| -> Result<Vec<MotionPlan>, Error> {
        let po = level_options(opts, n);
        legs.iter().map(|(_, v)| build_translation_plan(scene, *v, sub, &po)).collect()
    };
    run_levels(scene, RunMode::Translation, &starts, eps0, depth, opts, vec![], build)
}

/// Runs `D` levels of rotation plans for the single motion `x`, centers near `line`.
/// `exceptional` is extended by the scene's detected concurrency points.
pub fn besicovitch_rotation(
    scene: &Scene,
    x: &Rot,
    line: &ProjLine,
    eps0: f64,
    depth: u32,
    exceptional: &[Vec2],
    opts: &LimitOptions,
) -> Result<BesicovitchRun, Error> {
    check_common(scene, eps0, depth)?;
    let mut exc: Vec<Vec2> = exceptional.to_vec();
    for z in concurrency_points(scene, 1e-6) {
        if exc.iter().all(|e| (*e - z).norm() > 1e-6) {
            exc.push(z);
        }
    }
    for z in &exc {
        if line.distance_to(&proj_embed(*z)) < 1e-9 {
            return Err(Error::Precondition(format!("ℓ passes through exceptional point ({}, {})", z.x, z.y)));
        }
    }
    let build = |n: u32, sub: f64| -> Result<Vec<MotionPlan>, Error> {
        let mut po = level_options(opts, n);
        po.avoid_center = true;
        Ok(vec![build_rotation_plan(scene, x, line, sub, &po)?])
    };
    run_levels(scene, RunMode::Rotation { line: *line }, &[Isometry::IDENTITY], eps0, depth, opts, exc, build)
}

fn check_common(scene: &Scene, eps0: f64, depth: u32) -> Result<(), Error> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    if !(eps0.is_finite() && eps0 > 0.0) {
        return Err(Error::InvalidInput("eps0 must be positive".into()));
    }
    if scene.is_empty() {
        return Err(Error::InvalidInput("empty scene".into()));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_levels(
    scene: &Scene,
    mode: RunMode,
    starts: &[Isometry],
    eps0: f64,
    depth: u32,
    opts: &LimitOptions,
    exceptional: Vec<Vec2>,
    build: impl Fn(u32, f64) -> Result<Vec<MotionPlan>, Error>,
) -> Result<BesicovitchRun, Error> {
    let line = match &mode {
        RunMode::Rotation { line } => Some(*line),
        RunMode::Translation => None,
    };
    let nsamp = (opts.samples.max(1) * starts.len()).max(2);
    let mut samples: Vec<SampleRecord> = (0..nsamp)
        .map(|i| SampleRecord { s: (i as f64 + 0.5) / nsamp as f64, balls: vec![], deleted: vec![] })
        .collect();
    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut eps = Vec::new();
    let mut prev_path: Option<Vec<Isometry>> = None;
    let mut prev_boundary: Option<f64> = None;
    let radius = scene.bounding_radius();
    for n in 1..=depth {
        let e = level_eps(eps0, n);
        let sub = e / starts.len() as f64;
        let plans = build(n, sub)?;
        let mut rec = LevelRecord {
            n,
            eps: e,
            sub_eps: sub,
            steps: plans.iter().map(|p| p.step_count()).sum(),
            leaves: plans.iter().map(|p| p.leaves.len()).sum(),
            truncated_leaves: plans
                .iter()
                .flat_map(|p| p.leaves.iter())
                .filter(|l| l.stop == Stop::Truncated)
                .count(),
            certified_budget: plans.iter().map(|p| p.certified_budget).sum(),
            plans,
            starts: starts.to_vec(),
            area: None,
            boundary: None,
            nesting_deviation: None,
            nesting_budget: None,
            max_deleted_length: 0.0,
            max_components: 0,
        };
        // every path point runs some leaf's deletion
        for p in &rec.plans {
            let mut used = vec![false; p.leaves.len()];
            for st in &p.steps {
                used[st.leaf as usize] = true;
            }
            for (leaf, _) in p.leaves.iter().zip(&used).filter(|(_, u)| **u) {
                let set = deleted_set(scene, &leaf.deletion, line.as_ref(), n).1;
                rec.max_deleted_length = rec.max_deleted_length.max(set.length);
                rec.max_components = rec.max_components.max(set.components);
            }
        }
        // deletion seen by each sample
        let path = vertex_path(&rec.plans, starts);
        for smp in samples.iter_mut() {
            let (pi, step) = locate(&rec.plans, smp.s);
            let plan = &rec.plans[pi];
            let del = plan.deletion_of(&plan.steps[step]);
            let (ball, set) = deleted_set(scene, &del, line.as_ref(), n);
            smp.balls.push(ball);
            smp.deleted.push(set);
        }
        if let Some(pp) = &prev_path {
            rec.nesting_deviation = Some(one_sided_distance(&path, pp, radius));
            rec.nesting_budget = prev_boundary.map(|b| if b > 0.0 { e / (2.0 * b) } else { f64::INFINITY });
        }
        if opts.measure {
            let input = {
                let mut input = SweepInput::default();
                for (p, g) in rec.plans.iter().zip(starts) {
                    input.append(SweepInput::plan(scene, p, true), g);
                }
                input
            };
            let so = SweepOptions::with_grid(opts.grid_max);
            rec.area = Some(measure(&input, &so)?);
            if n < depth {
                let mut full = SweepInput::default();
                for (p, g) in rec.plans.iter().zip(starts) {
                    full.append(SweepInput::plan(scene, p, false), g);
                }
                let spec = coarse_spec(&full, &so)?;
                let grid = rasterize(&full, spec, &[]).0;
                let b = grid.boundary_length();
                rec.boundary = Some(b);
                prev_boundary = Some(b);
            }
        }
        prev_path = Some(path);
        eps.push(e);
        levels.push(rec);
    }
    let mut exceptional_hits = 0;
    let mut ball_nesting_failures = 0;
    for smp in &samples {
        for b in &smp.balls {
            if let BallCenter::Point(u) = b.center {
                exceptional_hits += exceptional.iter().filter(|z| proj_distance(&u, &proj_embed(**z)) <= b.radius).count();
            }
        }
        for w in smp.balls.windows(2) {
            if !ball_nested(&w[1], &w[0]) {
                ball_nesting_failures += 1;
            }
        }
    }
    Ok(BesicovitchRun {
        mode,
        depth,
        tail_budget: eps.iter().sum(),
        eps,
        levels,
        samples,
        exceptional,
        exceptional_hits,
        ball_nesting_failures,
    })
}

/// Whether the closed ball `inner` lies in `outer`.
pub fn ball_nested(inner: &Ball, outer: &Ball) -> bool {
    let d = match (inner.center, outer.center) {
        (BallCenter::Direction(a), BallCenter::Direction(b)) => {
            crate::geom::dir_distance(crate::geom::Direction::new(a), crate::geom::Direction::new(b))
        }
        (BallCenter::Point(a), BallCenter::Point(b)) => proj_distance(&a, &b),
        _ => return false,
    };
    d + inner.radius <= outer.radius + 1e-12
}

/// Plan index and step index at path-length fraction `s`.
fn locate(plans: &[MotionPlan], s: f64) -> (usize, usize) {
    let weight = |x: &Rot| x.w.norm().max(x.phi.abs());
    let total: f64 = plans.iter().flat_map(|p| p.steps.iter()).map(|st| weight(&st.x) * st.mult as f64).sum();
    let goal = s.clamp(0.0, 1.0) * total;
    let mut acc = 0.0;
    for (pi, p) in plans.iter().enumerate() {
        for (si, st) in p.steps.iter().enumerate() {
            acc += weight(&st.x) * st.mult as f64;
            if acc >= goal {
                return (pi, si);
            }
        }
    }
    let pi = plans.len() - 1;
    (pi, plans[pi].steps.len() - 1)
}

/// Ball record and deleted part of `scene` for one deletion.
pub fn deleted_set(scene: &Scene, del: &Deletion, line: Option<&ProjLine>, level: u32) -> (Ball, DeletedSet) {
    match (*del, line) {
        (Deletion::Tangent { center, radius }, _) => {
            let mask = slab_mask(scene, center, radius);
            let pieces: Vec<(usize, f64, f64)> =
                mask.iter().enumerate().filter(|(_, m)| **m).map(|(k, _)| (k, 0.0, 1.0)).collect();
            (
                Ball { level, center: BallCenter::Direction(center.angle()), radius },
                summarize(scene, &pieces),
            )
        }
        (Deletion::Normal { u, radius }, l) => {
            let pieces: Vec<(usize, f64, f64)> = match l {
                Some(l) => normal_slab_pieces(scene, l, &u, radius).0.iter().map(|p| (p.seg, p.t0, p.t1)).collect(),
                None => vec![],
            };
            (Ball { level, center: BallCenter::Point(u), radius }, summarize(scene, &pieces))
        }
    }
}

/// Length and number of connected pieces, joining pieces that meet at a
/// shared segment endpoint.
fn summarize(scene: &Scene, pieces: &[(usize, f64, f64)]) -> DeletedSet {
    let segs = scene.segments();
    let length = pieces.iter().map(|(k, t0, t1)| segs[*k].len * (t1 - t0)).sum();
    let touches = |a: &(usize, f64, f64), b: &(usize, f64, f64)| -> bool {
        if a.0 == b.0 {
            return (a.2 - b.1).abs() < 1e-12;
        }
        a.2 >= 1.0 - 1e-12 && b.1 <= 1e-12 && (segs[a.0].b - segs[b.0].a).norm() < 1e-12
    };
    let mut components = 0;
    for (i, p) in pieces.iter().enumerate() {
        if i == 0 || !touches(&pieces[i - 1], p) {
            components += 1;
        }
    }
    // a closed curve may wrap around
    if components > 1 && touches(&pieces[pieces.len() - 1], &pieces[0]) {
        components -= 1;
    }
    DeletedSet { length, components }
}

/// Isometry at every step boundary of a level, capped to about 4000 points.
fn vertex_path(plans: &[MotionPlan], starts: &[Isometry]) -> Vec<Isometry> {
    let total: u64 = plans.iter().map(|p| p.steps.len() as u64).sum();
    let stride = (total / 4000).max(1);
    let mut out = Vec::new();
    let mut count = 0u64;
    for (p, s) in plans.iter().zip(starts) {
        let mut g = *s;
        out.push(g);
        for st in &p.steps {
            g = g.compose(&st.x.scale(st.mult as f64).map());
            count += 1;
            if count % stride == 0 {
                out.push(g);
            }
        }
        out.push(g);
    }
    out
}

/// `max_a min_b d(a, b)` in the isometry metric at radius `r`.
fn one_sided_distance(a: &[Isometry], b: &[Isometry], r: f64) -> f64 {
    use rayon::prelude::*;
    a.par_iter()
        .map(|x| b.iter().map(|y| x.distance(y, r)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// Points where the normals of at least three segments meet, or of at
/// least 1% of them when the scene is large.
pub fn concurrency_points(scene: &Scene, tol: f64) -> Vec<Vec2> {
    let segs = scene.segments();
    let n = segs.len();
    if n < 3 {
        return vec![];
    }
    let normals: Vec<(Vec2, Vec2)> = segs.iter().map(|s| ((s.a + s.b) * 0.5, s.dir.unit())).collect();
    let scale = scene.bounding_radius().max(1e-12);
    let tol = tol * scale;
    let need = 3.max(n / 100);
    let mut cands = Vec::new();
    'outer: for stride in 1..n {
        for i in 0..n {
            let j = (i + stride) % n;
            if let Some(p) = normal_meet(normals[i], normals[j]) {
                if p.norm() < 1e6 * scale {
                    cands.push(p);
                }
            }
            if cands.len() >= CONCURRENCY_CANDIDATES {
                break 'outer;
            }
        }
        if stride >= 8 {
            break;
        }
    }
    let mut found: Vec<Vec2> = Vec::new();
    for c in cands {
        if found.iter().any(|f| (*f - c).norm() <= tol * 10.0) {
            continue;
        }
        let hits = normals.iter().filter(|(m, d)| (c - *m).dot(*d).abs() <= tol).count();
        if hits >= need {
            found.push(c);
        }
    }
    found
}

/// Intersection of the normal lines `{x : (x − m)·d = 0}`.
fn normal_meet(a: (Vec2, Vec2), b: (Vec2, Vec2)) -> Option<Vec2> {
    let det = a.1.cross(b.1);
    if det.abs() < 1e-12 {
        return None;
    }
    let (ca, cb) = (a.0.dot(a.1), b.0.dot(b.1));
    // solve d_a·x = ca, d_b·x = cb
    Some(Vec2::new((ca * b.1.y - cb * a.1.y) / det, (a.1.x * cb - b.1.x * ca) / det))
}

/// `k×k` shifts spanning `square`, corners included.
pub fn shift_grid(k: usize, square: &Bbox) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let t = |m: usize| if k == 1 { 0.0 } else { m as f64 / (k - 1) as f64 };
            out.push(Vec2::new(
                square.min.x + t(i) * square.width(),
                square.min.y + t(j) * square.height(),
            ));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NikodymCover {
    pub shifts: Vec<Vec2>,
    pub square: Bbox,
    pub coverage: f64,
    pub covered_cells: u64,
    pub square_cells: u64,
    /// Area of the shifted deleted sweeps.
    pub area: AreaReport,
    /// `ε_D`.
    pub level_budget: f64,
    /// `|shifts|·ε_D`.
    pub budget: f64,
}

impl NikodymCover {
    pub fn covers(&self, threshold: f64) -> bool {
        self.coverage >= threshold
    }

    pub fn certified(&self) -> bool {
        self.area.estimate <= self.budget + self.area.uncertainty
    }
}

/// Shifts of `gamma` swept along the run's last path, against the target square,
/// and the shifted deleted sweeps of `scene`.
pub fn nikodym_assemble(
    scene: &Scene,
    gamma: &Scene,
    run: &BesicovitchRun,
    shifts: &[Vec2],
    square: Bbox,
    grid_max: usize,
) -> Result<NikodymCover, Error> {
    let lv = run.last();
    if !square.is_valid() || square.width() <= 0.0 || square.height() <= 0.0 {
        return Err(Error::InvalidInput("target square is empty".into()));
    }
    if shifts.is_empty() {
        return Ok(NikodymCover {
            shifts: vec![],
            square,
            coverage: 0.0,
            covered_cells: 0,
            square_cells: 0,
            area: AreaReport::zero(0.0),
            level_budget: lv.eps,
            budget: 0.0,
        });
    }
    let gin = run.level_input(run.levels.len() - 1, gamma, false);
    let single = {
        let so = SweepOptions::with_grid(grid_max);
        rasterize(&gin, coarse_spec(&gin, &so)?, &[]).0
    };
    if !has_interior(&single) {
        return Err(Error::Precondition("Γ sweep has empty interior at raster resolution".into()));
    }
    let ein = run.level_input(run.levels.len() - 1, scene, true);
    let area = measure_shifted(&ein, shifts, grid_max)?;
    let h = if area.h > 0.0 { area.h } else { square.width().max(square.height()) / grid_max.max(1) as f64 };
    let cover = match lattice_cell(shifts, h) {
        Some(hc) if (hc - h).abs() <= 1e-12 * h => stamped_grid(&gin, shifts, &square, h)?,
        _ => rasterize(&gin, GridSpec::covering(&square, h)?, shifts).0,
    };
    let spec = *cover.spec();
    let (mut covered, mut total) = (0u64, 0u64);
    for iy in 0..spec.ny {
        for ix in 0..spec.nx {
            let c = spec.cell_center(ix, iy);
            if c.x < square.min.x || c.x > square.max.x || c.y < square.min.y || c.y > square.max.y {
                continue;
            }
            total += 1;
            if cover.get(ix, iy) {
                covered += 1;
            }
        }
    }
    Ok(NikodymCover {
        shifts: shifts.to_vec(),
        square,
        coverage: if total > 0 { covered as f64 / total as f64 } else { 0.0 },
        covered_cells: covered,
        square_cells: total,
        area,
        level_budget: lv.eps,
        budget: lv.eps * shifts.len() as f64,
    })
}

/// Some set cell has all four neighbours set.
pub fn has_interior(g: &RasterGrid) -> bool {
    let s = g.spec();
    for iy in 1..s.ny.saturating_sub(1) {
        for ix in 1..s.nx.saturating_sub(1) {
            if g.get(ix, iy) && g.get(ix - 1, iy) && g.get(ix + 1, iy) && g.get(ix, iy - 1) && g.get(ix, iy + 1) {
                return true;
            }
        }
    }
    false
}

/// Mode-independent check that every level ends where the base path ends.
pub fn endpoint_error(run: &BesicovitchRun) -> f64 {
    let mut worst: f64 = 0.0;
    for lv in &run.levels {
        for p in &lv.plans {
            let e = match p.mode {
                PlanMode::Translation => (p.translation_endpoint() - p.target.v()).norm(),
                PlanMode::Rotation { .. } => p.endpoint().distance(&p.target.map(), 1.0),
            };
            worst = worst.max(e);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_concurrency_is_center() {
        let c = Scene::circle(1.0, 90).unwrap().map_points(|p| p + Vec2::new(2.0, -1.0));
        let pts = concurrency_points(&c, 1e-6);
        assert_eq!(pts.len(), 1);
        assert!((pts[0] - Vec2::new(2.0, -1.0)).norm() < 1e-6);
    }

    #[test]
    fn convex_graph_has_no_concurrency() {
        let g = Scene::convex_graph([0.5, 0.0, 0.0], 1.0, 50).unwrap();
        assert!(concurrency_points(&g, 1e-6).is_empty());
    }

    #[test]
    fn shift_grid_corners() {
        let sq = Bbox { min: Vec2::ZERO, max: Vec2::new(1.0, 1.0) };
        let g = shift_grid(5, &sq);
        assert_eq!(g.len(), 25);
        assert!(g.contains(&Vec2::new(1.0, 1.0)));
        assert!(g.contains(&Vec2::new(0.25, 0.5)));
    }

    #[test]
    fn components_of_circle_arc() {
        let c = Scene::circle(1.0, 72).unwrap();
        // tangent slab around the x direction hits two opposite arcs
        let (_, d) = deleted_set(
            &c,
            &Deletion::Tangent { center: crate::geom::Direction::new(0.0), radius: 0.2 },
            None,
            1,
        );
        assert_eq!(d.components, 2);
    }
}
