//! Planar points, directions in P¹, projective points and lines in P², and
//! polyline scenes with their exact tangent field.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Tolerance for incidence tests on unit homogeneous vectors.
pub const INCIDENCE_TOL: f64 = 1e-9;

/// A point or vector of the plane, also read as a complex number `x + iy`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// `e^{iφ}`.
    pub fn expi(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Complex product.
    pub fn cmul(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x * o.x - self.y * o.y, self.x * o.y + self.y * o.x)
    }

    /// Complex quotient; `o` must be nonzero.
    pub fn cdiv(self, o: Vec2) -> Vec2 {
        let d = o.norm_sq();
        Vec2::new(
            (self.x * o.x + self.y * o.y) / d,
            (self.y * o.x - self.x * o.y) / d,
        )
    }

    /// Multiplication by `i`.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotate(self, phi: f64) -> Vec2 {
        self.cmul(Vec2::expi(phi))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

/// A direction, i.e. an element of P¹ = ℝ/πℤ, stored in `[0, π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Direction(f64);

impl Direction {
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(PI);
        if a >= PI {
            a = 0.0;
        }
        Direction(a)
    }

    pub fn of(v: Vec2) -> Self {
        Direction::new(v.angle())
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    pub fn unit(self) -> Vec2 {
        Vec2::expi(self.0)
    }

    /// Offset `b − self` reduced to `(−π/2, π/2]`.
    pub fn offset_to(self, b: Direction) -> f64 {
        wrap_half(b.0 - self.0)
    }
}

/// Reduces an angle difference to `(−π/2, π/2]`.
pub fn wrap_half(d: f64) -> f64 {
    let mut r = d.rem_euclid(PI);
    if r > FRAC_PI_2 {
        r -= PI;
    }
    r
}

/// Metric on P¹.
pub fn dir_distance(a: Direction, b: Direction) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(PI - d).max(0.0)
}

/// A connected subset of P¹.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DirInterval {
    Empty,
    Arc { anchor: Direction, halfwidth: f64 },
    Full,
}

impl DirInterval {
    /// The closed interval `[a, b]` of length `dir_distance(a, b) < π/2`.
    pub fn bracket(a: Direction, b: Direction) -> Result<Self, Error> {
        let off = a.offset_to(b);
        if off.abs() >= FRAC_PI_2 {
            return Err(Error::InvalidInput(format!(
                "bracket endpoints {} and {} are π/2 apart",
                a.0, b.0
            )));
        }
        Ok(DirInterval::Arc {
            anchor: Direction::new(a.0 + off / 2.0),
            halfwidth: off.abs() / 2.0,
        })
    }

    /// The open ball `B(center, r)`, or the full circle when `r ≥ π/2`.
    pub fn ball(center: Direction, r: f64) -> Self {
        if r >= FRAC_PI_2 {
            DirInterval::Full
        } else if r <= 0.0 {
            DirInterval::Empty
        } else {
            DirInterval::Arc { anchor: center, halfwidth: r }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            DirInterval::Empty => 0.0,
            DirInterval::Arc { halfwidth, .. } => 2.0 * halfwidth,
            DirInterval::Full => PI,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, DirInterval::Empty)
    }

    pub fn contains(&self, t: Direction) -> bool {
        match *self {
            DirInterval::Empty => false,
            DirInterval::Arc { anchor, halfwidth } => {
                dir_distance(anchor, t) <= halfwidth + 1e-12
            }
            DirInterval::Full => true,
        }
    }

    /// Endpoints `(lo, hi)` as real angles with `hi − lo = length`.
    pub fn endpoints(&self) -> Option<(f64, f64)> {
        match *self {
            DirInterval::Arc { anchor, halfwidth } => {
                Some((anchor.0 - halfwidth, anchor.0 + halfwidth))
            }
            _ => None,
        }
    }

    /// Whether `self ⊆ other`.
    pub fn subset_of(&self, other: &DirInterval) -> bool {
        match (*self, *other) {
            (DirInterval::Empty, _) | (_, DirInterval::Full) => true,
            (_, DirInterval::Empty) => false,
            (DirInterval::Full, _) => false,
            (
                DirInterval::Arc { anchor: a, halfwidth: ha },
                DirInterval::Arc { anchor: b, halfwidth: hb },
            ) => dir_distance(a, b) + ha <= hb + 1e-12,
        }
    }

    /// Union of two connected sets whose union is connected.
    pub fn union(&self, other: &DirInterval) -> Result<Self, Error> {
        let (a, ha, b, hb) = match (*self, *other) {
            (DirInterval::Full, _) | (_, DirInterval::Full) => return Ok(DirInterval::Full),
            (DirInterval::Empty, x) | (x, DirInterval::Empty) => return Ok(x),
            (
                DirInterval::Arc { anchor: a, halfwidth: ha },
                DirInterval::Arc { anchor: b, halfwidth: hb },
            ) => (a, ha, b, hb),
        };
        let o = a.offset_to(b);
        let mut best: Option<(f64, f64)> = None;
        for shift in [0.0, -PI, PI] {
            let c = o + shift;
            if (c.abs() - ha - hb) > 1e-12 {
                continue;
            }
            let lo = (-ha).min(c - hb);
            let hi = ha.max(c + hb);
            if best.map_or(true, |(l, h)| hi - lo < h - l) {
                best = Some((lo, hi));
            }
        }
        let (lo, hi) = best.ok_or_else(|| {
            Error::InvalidInput("union of disjoint direction intervals".into())
        })?;
        if hi - lo >= PI {
            return Ok(DirInterval::Full);
        }
        Ok(DirInterval::Arc {
            anchor: Direction::new(a.0 + (lo + hi) / 2.0),
            halfwidth: (hi - lo) / 2.0,
        })
    }

    /// Signed offset of `t` from the midpoint, in `(−π/2, π/2]`.
    pub fn offset_from_mid(&self, t: Direction) -> Option<f64> {
        match *self {
            DirInterval::Arc { anchor, .. } => Some(anchor.offset_to(t)),
            _ => None,
        }
    }

    /// The midpoint of the complementary arc, if the complement is nonempty.
    pub fn gap_center(&self) -> Option<Direction> {
        match *self {
            DirInterval::Empty => Some(Direction::new(0.0)),
            DirInterval::Arc { anchor, .. } => Some(Direction::new(anchor.0 + FRAC_PI_2)),
            DirInterval::Full => None,
        }
    }

    /// Half the length of the complement.
    pub fn gap_halfwidth(&self) -> f64 {
        (PI - self.length()) / 2.0
    }
}

/// A point of P², a unit vector of ℝ³ up to sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjPoint {
    pub h: [f64; 3],
}

/// A line of P², given by unit homogeneous coefficients up to sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjLine {
    pub n: [f64; 3],
}

fn normalize3(v: Vector3<f64>) -> Result<[f64; 3], Error> {
    let n = v.norm();
    if !(n > 1e-300) || !n.is_finite() {
        return Err(Error::InvalidInput("zero homogeneous vector".into()));
    }
    let u = v / n;
    Ok([u.x, u.y, u.z])
}

impl ProjPoint {
    pub fn new(h: [f64; 3]) -> Result<Self, Error> {
        Ok(ProjPoint { h: normalize3(Vector3::from(h))? })
    }

    pub fn vec(&self) -> Vector3<f64> {
        Vector3::from(self.h)
    }

    /// The affine point, if not at infinity.
    pub fn affine(&self) -> Option<Vec2> {
        if self.h[2].abs() < 1e-15 {
            None
        } else {
            Some(Vec2::new(self.h[0] / self.h[2], self.h[1] / self.h[2]))
        }
    }

    pub fn approx_eq(&self, o: &ProjPoint, tol: f64) -> bool {
        proj_distance(self, o) <= tol
    }
}

impl ProjLine {
    pub fn new(n: [f64; 3]) -> Result<Self, Error> {
        Ok(ProjLine { n: normalize3(Vector3::from(n))? })
    }

    pub fn vec(&self) -> Vector3<f64> {
        Vector3::from(self.n)
    }

    /// The line through two distinct projective points.
    pub fn through(a: &ProjPoint, b: &ProjPoint) -> Result<Self, Error> {
        ProjLine::new(normalize3(a.vec().cross(&b.vec()))?)
    }

    /// The line at infinity.
    pub fn at_infinity() -> Self {
        ProjLine { n: [0.0, 0.0, 1.0] }
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        self.vec().dot(&p.vec()).abs() <= INCIDENCE_TOL
    }

    /// Distance from a point to the line in the P² metric.
    pub fn distance_to(&self, p: &ProjPoint) -> f64 {
        self.vec().dot(&p.vec()).abs().min(1.0).asin()
    }

    pub fn approx_eq(&self, o: &ProjLine, tol: f64) -> bool {
        let c = self.vec().cross(&o.vec()).norm();
        c <= tol
    }
}

/// `arccos |⟨a, b⟩|`, computed as an `atan2` for accuracy near 0.
pub fn proj_distance(a: &ProjPoint, b: &ProjPoint) -> f64 {
    let (u, v) = (a.vec(), b.vec());
    u.cross(&v).norm().atan2(u.dot(&v).abs())
}

/// The standard embedding `(x, y) ↦ [x : y : 1]`.
pub fn proj_embed(p: Vec2) -> ProjPoint {
    ProjPoint::new([p.x, p.y, 1.0]).expect("nonzero last coordinate")
}

/// The point at infinity of direction θ.
pub fn dir_to_infinite(t: Direction) -> ProjPoint {
    let u = t.unit();
    ProjPoint { h: [u.x, u.y, 0.0] }
}

/// The normal line ν_x through `x` for tangent θ.
pub fn normal_line(x: Vec2, t: Direction) -> ProjLine {
    let u = t.unit();
    ProjLine::new([u.x, u.y, -x.dot(u)]).expect("unit tangent is nonzero")
}

/// Whether the intersection of two lines lies within `eps` of `c`.
pub fn line_ball_hit(a: &ProjLine, b: &ProjLine, c: &ProjPoint, eps: f64) -> Result<bool, Error> {
    let p = a.vec().cross(&b.vec());
    if p.norm() < INCIDENCE_TOL {
        return Err(Error::InvalidInput("identical lines have no intersection point".into()));
    }
    let p = ProjPoint::new([p.x, p.y, p.z])?;
    Ok(proj_distance(&p, c) < eps)
}

/// One straight piece of a scene.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
    pub dir: Direction,
    pub len: f64,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Segment { a, b, dir: Direction::of(b - a), len: (b - a).norm() }
    }

    pub fn at(&self, t: f64) -> Vec2 {
        self.a + (self.b - self.a) * t
    }

    /// The piece over `[t0, t1]`, keeping the parent's tangent.
    pub fn sub(&self, t0: f64, t1: f64) -> Segment {
        Segment { a: self.at(t0), b: self.at(t1), dir: self.dir, len: self.len * (t1 - t0) }
    }
}

/// On-disk scene format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneFile {
    pub polylines: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub closed: Vec<bool>,
}

/// A finite union of polylines.
#[derive(Clone, Debug)]
pub struct Scene {
    segments: Vec<Segment>,
    total_length: f64,
    bounding_radius: f64,
}

impl Scene {
    /// Builds a scene from vertex lists; closed polylines get a closing segment.
    pub fn from_polylines(polylines: &[Vec<Vec2>], closed: &[bool]) -> Result<Self, Error> {
        let mut segs = Vec::new();
        for (k, pl) in polylines.iter().enumerate() {
            if pl.len() < 2 {
                return Err(Error::InvalidInput(format!("polyline {k} has fewer than 2 vertices")));
            }
            let close = closed.get(k).copied().unwrap_or(false);
            let n = pl.len();
            let count = if close { n } else { n - 1 };
            for j in 0..count {
                let (a, b) = (pl[j], pl[(j + 1) % n]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidInput(format!("polyline {k} has a non-finite vertex")));
                }
                let s = Segment::new(a, b);
                if !(s.len > 0.0) {
                    return Err(Error::InvalidInput(format!("polyline {k} segment {j} has zero length")));
                }
                segs.push(s);
            }
        }
        Scene::from_segments(segs)
    }

    pub fn from_segments(segments: Vec<Segment>) -> Result<Self, Error> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("scene has no segments".into()));
        }
        Ok(Scene::from_segments_unchecked(segments))
    }

    /// Like [`Scene::from_segments`] but allows the empty scene, used for slabs.
    pub fn from_segments_unchecked(segments: Vec<Segment>) -> Self {
        let total_length = segments.iter().map(|s| s.len).sum();
        let bounding_radius = segments
            .iter()
            .map(|s| s.a.norm().max(s.b.norm()))
            .fold(0.0, f64::max);
        Scene { segments, total_length, bounding_radius }
    }

    pub fn from_file(f: &SceneFile) -> Result<Self, Error> {
        let pls: Vec<Vec<Vec2>> = f
            .polylines
            .iter()
            .map(|pl| pl.iter().map(|p| Vec2::new(p[0], p[1])).collect())
            .collect();
        Scene::from_polylines(&pls, &f.closed)
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let f: SceneFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("scene json: {e}")))?;
        Scene::from_file(&f)
    }

    /// Exports each segment as an open two-vertex polyline, merging chains.
    pub fn to_file(&self) -> SceneFile {
        let mut polylines: Vec<Vec<[f64; 2]>> = Vec::new();
        for s in &self.segments {
            match polylines.last_mut() {
                Some(pl) if pl.last() == Some(&[s.a.x, s.a.y]) => pl.push([s.b.x, s.b.y]),
                _ => polylines.push(vec![[s.a.x, s.a.y], [s.b.x, s.b.y]]),
            }
        }
        let closed = vec![false; polylines.len()];
        SceneFile { polylines, closed }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    /// Applies a map to every vertex; tangents are recomputed.
    pub fn map_points(&self, f: impl Fn(Vec2) -> Vec2) -> Scene {
        Scene::from_segments_unchecked(
            self.segments.iter().map(|s| Segment::new(f(s.a), f(s.b))).collect(),
        )
    }

    /// Circle of radius `r` sampled by a regular `n`-gon.
    pub fn circle(r: f64, n: usize) -> Result<Self, Error> {
        if !(r > 0.0) || n < 3 {
            return Err(Error::InvalidInput("circle needs r > 0 and n ≥ 3".into()));
        }
        let pts: Vec<Vec2> = (0..n)
            .map(|k| Vec2::expi(2.0 * PI * k as f64 / n as f64) * r)
            .collect();
        Scene::from_polylines(&[pts], &[true])
    }

    /// Horizontal segment of length `len` centred at the origin.
    pub fn segment(len: f64) -> Result<Self, Error> {
        if !(len > 0.0) {
            return Err(Error::InvalidInput("segment needs len > 0".into()));
        }
        Scene::from_polylines(&[vec![Vec2::new(-len / 2.0, 0.0), Vec2::new(len / 2.0, 0.0)]], &[false])
    }

    /// Graph of `a x² + b x + c` over `|x| ≤ span/2`, sampled by `n` segments.
    pub fn convex_graph(coeffs: [f64; 3], span: f64, n: usize) -> Result<Self, Error> {
        if !(span > 0.0) || n < 1 {
            return Err(Error::InvalidInput("convex graph needs span > 0 and n ≥ 1".into()));
        }
        let [a, b, c] = coeffs;
        let pts: Vec<Vec2> = (0..=n)
            .map(|k| {
                let x = -span / 2.0 + span * k as f64 / n as f64;
                Vec2::new(x, a * x * x + b * x + c)
            })
            .collect();
        Scene::from_polylines(&[pts], &[false])
    }
}

/// Tangent direction of each segment. Vertices take the tangent of the
/// segment with the lower index.
pub fn scene_tangents(scene: &Scene) -> Vec<Direction> {
    scene.segments.iter().map(|s| s.dir).collect()
}

/// Mask of segments whose tangent lies in the open ball `B(center, delta)`.
pub fn slab_mask(scene: &Scene, center: Direction, delta: f64) -> Vec<bool> {
    scene.segments.iter().map(|s| dir_distance(s.dir, center) < delta).collect()
}

/// Splits a scene into the tangent slab `B(center, delta)` and its complement.
pub fn scene_slab_split(scene: &Scene, center: Direction, delta: f64) -> (Scene, Scene) {
    let (inside, outside): (Vec<Segment>, Vec<Segment>) = scene
        .segments
        .iter()
        .partition(|s| dir_distance(s.dir, center) < delta);
    (Scene::from_segments_unchecked(inside), Scene::from_segments_unchecked(outside))
}

pub fn scene_slab(scene: &Scene, center: Direction, delta: f64) -> Scene {
    scene_slab_split(scene, center, delta).0
}

/// A parameter interval `[t0, t1]` on segment `seg` of a scene.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub seg: usize,
    pub t0: f64,
    pub t1: f64,
}

/// Whether ν_x meets ℓ inside `B(u, eps)`. A normal line equal to ℓ counts as a hit.
pub fn normal_hits(x: Vec2, t: Direction, l: &ProjLine, u: &ProjPoint, eps: f64) -> bool {
    let n = normal_line(x, t);
    let p = n.vec().cross(&l.vec());
    if p.norm() < INCIDENCE_TOL {
        return true;
    }
    let q = ProjPoint { h: [p.x / p.norm(), p.y / p.norm(), p.z / p.norm()] };
    proj_distance(&q, u) < eps
}

/// Splits every segment at the exact boundary of the normal-slab predicate.
/// Returns `(inside, outside)` pieces.
pub fn normal_slab_pieces(
    scene: &Scene,
    l: &ProjLine,
    u: &ProjPoint,
    eps: f64,
) -> (Vec<Piece>, Vec<Piece>) {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    let lv = l.vec();
    let uv = u.vec();
    let c2 = if eps >= FRAC_PI_2 { -1.0 } else { eps.cos().powi(2) };
    for (k, s) in scene.segments.iter().enumerate() {
        let d = s.dir.unit();
        let n0 = Vector3::new(d.x, d.y, -s.a.dot(d));
        let n1 = Vector3::new(0.0, 0.0, -(s.b - s.a).dot(d));
        let p0 = n0.cross(&lv);
        let p1 = n1.cross(&lv);
        // (p·u)² − cos²ε |p|², a quadratic in t
        let (a0, a1) = (p0.dot(&uv), p1.dot(&uv));
        let qa = a1 * a1 - c2 * p1.norm_squared();
        let qb = 2.0 * (a0 * a1 - c2 * p0.dot(&p1));
        let qc = a0 * a0 - c2 * p0.norm_squared();
        let mut cuts = vec![0.0, 1.0];
        for r in quadratic_roots(qa, qb, qc) {
            if r > 0.0 && r < 1.0 {
                cuts.push(r);
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 <= 1e-15 {
                continue;
            }
            let mid = s.at((t0 + t1) / 2.0);
            let piece = Piece { seg: k, t0, t1 };
            if normal_hits(mid, s.dir, l, u, eps) {
                push_piece(&mut inside, piece);
            } else {
                push_piece(&mut outside, piece);
            }
        }
    }
    (inside, outside)
}

fn push_piece(v: &mut Vec<Piece>, p: Piece) {
    if let Some(last) = v.last_mut() {
        if last.seg == p.seg && (last.t1 - p.t0).abs() < 1e-15 {
            last.t1 = p.t1;
            return;
        }
    }
    v.push(p);
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return vec![];
    }
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let mut r = vec![q / a];
    if q != 0.0 {
        r.push(c / q);
    }
    r
}

/// Builds a sub-scene from pieces.
pub fn pieces_scene(scene: &Scene, pieces: &[Piece]) -> Scene {
    Scene::from_segments_unchecked(
        pieces.iter().map(|p| scene.segments[p.seg].sub(p.t0, p.t1)).collect(),
    )
}

/// The normal slab `{x : ν_x ∩ ℓ ∈ B(u, eps)}` as a clipped sub-scene.
pub fn scene_normal_slab(scene: &Scene, l: &ProjLine, u: &ProjPoint, eps: f64) -> Scene {
    pieces_scene(scene, &normal_slab_pieces(scene, l, u, eps).0)
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bbox {
    pub fn empty() -> Self {
        Bbox {
            min: Vec2::new(f64::INFINITY, f64::INFINITY),
            max: Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn include(&mut self, p: Vec2) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(&self, o: &Bbox) -> Bbox {
        let mut b = *self;
        b.include(o.min);
        b.include(o.max);
        b
    }

    pub fn pad(&self, r: f64) -> Bbox {
        Bbox { min: self.min - Vec2::new(r, r), max: self.max + Vec2::new(r, r) }
    }

    pub fn is_valid(&self) -> bool {
        self.min.x <= self.max.x && self.min.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

impl Scene {
    pub fn bbox(&self) -> Bbox {
        let mut b = Bbox::empty();
        for s in &self.segments {
            b.include(s.a);
            b.include(s.b);
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dir_distance_examples() {
        let d = |a, b| dir_distance(Direction::new(a), Direction::new(b));
        assert_eq!(d(0.0, 0.0), 0.0);
        assert!((d(0.0, FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        assert!((d(0.1, PI - 0.1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn proj_distance_examples() {
        let o = proj_embed(Vec2::ZERO);
        let e = proj_embed(Vec2::new(1.0, 0.0));
        assert!((proj_distance(&o, &e) - PI / 4.0).abs() < 1e-12);
        let i1 = dir_to_infinite(Direction::new(0.0));
        let i2 = dir_to_infinite(Direction::new(FRAC_PI_2));
        assert!((proj_distance(&i1, &i2) - FRAC_PI_2).abs() < 1e-12);
        assert!((proj_distance(&o, &i2) - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn embed_examples() {
        assert_eq!(proj_embed(Vec2::ZERO).h, [0.0, 0.0, 1.0]);
        let p = proj_embed(Vec2::new(3.0, 4.0));
        let s = 26f64.sqrt();
        assert!((p.h[0] - 3.0 / s).abs() < 1e-15 && (p.h[2] - 1.0 / s).abs() < 1e-15);
        assert_eq!(dir_to_infinite(Direction::new(0.0)).h, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn normal_line_examples() {
        let l = normal_line(Vec2::new(1.0, 0.0), Direction::new(0.0));
        assert!(l.approx_eq(&ProjLine::new([1.0, 0.0, -1.0]).unwrap(), 1e-12));
        let l = normal_line(Vec2::ZERO, Direction::new(FRAC_PI_2));
        assert!(l.approx_eq(&ProjLine::new([0.0, 1.0, 0.0]).unwrap(), 1e-12));
        let x = Vec2::new(1.0, 1.0);
        let l = normal_line(x, Direction::new(PI / 4.0));
        assert!(l.contains(&proj_embed(x)));
        assert!(l.contains(&dir_to_infinite(Direction::new(3.0 * PI / 4.0))));
    }

    #[test]
    fn line_ball_hit_examples() {
        let x1 = ProjLine::new([1.0, 0.0, -1.0]).unwrap();
        let inf = ProjLine::at_infinity();
        assert!(!line_ball_hit(&x1, &inf, &dir_to_infinite(Direction::new(0.0)), 0.1).unwrap());
        let y0 = ProjLine::new([0.0, 1.0, 0.0]).unwrap();
        let x0 = ProjLine::new([1.0, 0.0, 0.0]).unwrap();
        assert!(line_ball_hit(&y0, &x0, &proj_embed(Vec2::ZERO), 1e-6).unwrap());
        assert!(line_ball_hit(&y0, &x1, &proj_embed(Vec2::new(1.0, 0.05)), 0.1).unwrap());
        assert!(line_ball_hit(&y0, &y0, &proj_embed(Vec2::ZERO), 0.1).is_err());
    }

    #[test]
    fn square_tangents() {
        let sq = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let s = Scene::from_polylines(&[sq], &[true]).unwrap();
        let t: Vec<f64> = scene_tangents(&s).iter().map(|d| d.angle()).collect();
        let want = [0.0, FRAC_PI_2, 0.0, FRAC_PI_2];
        for (a, b) in t.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ngon_tangents() {
        let n = 12;
        let s = Scene::circle(1.0, n).unwrap();
        for (k, d) in scene_tangents(&s).iter().enumerate() {
            let want = Direction::new((2 * k + 1) as f64 * PI / n as f64 + FRAC_PI_2);
            assert!(dir_distance(*d, want) < 1e-12);
        }
    }

    #[test]
    fn slab_examples() {
        let c = Scene::circle(1.0, 720).unwrap();
        let (a, b) = scene_slab_split(&c, Direction::new(0.0), FRAC_PI_2 - 1e-3);
        assert!(a.total_length() > 0.99 * c.total_length());
        assert!(b.total_length() < 0.01 * c.total_length());
        let s = Scene::segment(1.0).unwrap();
        assert_eq!(scene_slab(&s, Direction::new(0.0), 1e-3).segments().len(), 1);
    }

    #[test]
    fn circle_normal_slab_at_infinity_matches_tangent_slab() {
        let c = Scene::circle(1.0, 360).unwrap();
        let inf = ProjLine::at_infinity();
        let t = Direction::new(0.3);
        let u = dir_to_infinite(Direction::new(t.angle() + FRAC_PI_2));
        let eps = 0.2;
        let by_normal = scene_normal_slab(&c, &inf, &u, eps);
        let by_tangent = scene_slab(&c, t, eps);
        assert!((by_normal.total_length() - by_tangent.total_length()).abs() < 1e-9);
    }

    #[test]
    fn interval_union_and_gap() {
        let a = DirInterval::bracket(Direction::new(0.0), Direction::new(0.4)).unwrap();
        assert!((a.length() - 0.4).abs() < 1e-12);
        let b = DirInterval::bracket(Direction::new(0.3), Direction::new(1.2)).unwrap();
        let u = a.union(&b).unwrap();
        assert!((u.length() - 1.2).abs() < 1e-12);
        let w = DirInterval::bracket(Direction::new(PI - 0.2), Direction::new(0.1)).unwrap();
        assert!((w.length() - 0.3).abs() < 1e-12);
        assert!(w.contains(Direction::new(0.0)));
        let g = u.gap_center().unwrap();
        assert!(!u.contains(g));
    }
}
