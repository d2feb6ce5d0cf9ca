//! Orientation-preserving rigid motions of the plane.
//!
//! A motion `x = (w, φ)` is the rotation by angle `φ` about the center
//! `z = w/φ`, or the translation by `v = -i·w` when `φ = 0`. It acts by
//! `u ↦ e^{iφ}u + v` with `v = z(1 − e^{iφ}) = w·f(φ)`, `f(φ) = (1 − e^{iφ})/φ`.
//! Sequences of motions are composed intrinsically: each motion is read in
//! the frame left behind by the previous ones.

use serde::{Deserialize, Serialize};

use crate::geom::{ProjPoint, Vec2};
use crate::Error;

/// Below this, `φ` is treated as zero.
pub const ANGLE_EPS: f64 = 1e-12;

/// `(1 − e^{iφ})/φ`, continuous at 0 where it equals `−i`.
pub fn f_factor(phi: f64) -> Vec2 {
    if phi.abs() < 1e-6 {
        let p2 = phi * phi;
        Vec2::new(phi / 2.0 * (1.0 - p2 / 12.0), -(1.0 - p2 / 6.0))
    } else {
        let s = (phi / 2.0).sin();
        Vec2::new(2.0 * s * s / phi, -phi.sin() / phi)
    }
}

/// The action `u ↦ e^{iφ}u + v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub phi: f64,
    pub v: Vec2,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry { phi: 0.0, v: Vec2::ZERO };

    pub fn apply(&self, u: Vec2) -> Vec2 {
        u.rotate(self.phi) + self.v
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { phi: self.phi + other.phi, v: self.v + other.v.rotate(self.phi) }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { phi: -self.phi, v: -self.v.rotate(-self.phi) }
    }

    /// Upper bound on `sup_{|u| ≤ r} |self(u) − other(u)|`.
    pub fn distance(&self, other: &Isometry, r: f64) -> f64 {
        (Vec2::expi(self.phi) - Vec2::expi(other.phi)).norm() * r + (self.v - other.v).norm()
    }
}

/// A motion in `(w, φ)` coordinates. `(0, 0)` is the identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rot {
    pub w: Vec2,
    pub phi: f64,
}

impl Rot {
    pub const IDENTITY: Rot = Rot { w: Vec2::ZERO, phi: 0.0 };

    pub fn new(w: Vec2, phi: f64) -> Self {
        Rot { w, phi }
    }

    pub fn from_coords(c: [f64; 3]) -> Self {
        Rot { w: Vec2::new(c[0], c[1]), phi: c[2] }
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.w.x, self.w.y, self.phi]
    }

    /// Rotation by `phi` about `z`.
    pub fn from_center(z: Vec2, phi: f64) -> Result<Self, Error> {
        if phi == 0.0 || !phi.is_finite() {
            return Err(Error::InvalidInput("rotation about a center needs φ ≠ 0".into()));
        }
        Ok(Rot { w: z * phi, phi })
    }

    /// Translation by `v`, i.e. `w = i·v`.
    pub fn translation(v: Vec2) -> Self {
        Rot { w: v.perp(), phi: 0.0 }
    }

    pub fn is_identity(&self) -> bool {
        self.w == Vec2::ZERO && self.phi == 0.0
    }

    pub fn is_translation(&self) -> bool {
        self.phi == 0.0
    }

    /// Image of the origin.
    pub fn v(&self) -> Vec2 {
        self.w.cmul(f_factor(self.phi))
    }

    /// Center of rotation, `None` for translations.
    pub fn center(&self) -> Option<Vec2> {
        if self.phi.abs() < ANGLE_EPS {
            None
        } else {
            Some(self.w / self.phi)
        }
    }

    pub fn map(&self) -> Isometry {
        Isometry { phi: self.phi, v: self.v() }
    }

    /// The motion whose map is `g`, with `g.phi` kept as the angle.
    ///
    /// When `f(φ)` vanishes (`φ` a nonzero multiple of 2π) the map is a pure
    /// translation that no `(w, φ)` with this angle reproduces unless `v = 0`;
    /// the rotation about the origin is returned.
    pub fn from_isometry(g: &Isometry) -> Self {
        if g.phi.abs() < ANGLE_EPS {
            return Rot { w: g.v.perp(), phi: 0.0 };
        }
        let f = f_factor(g.phi);
        if f.norm() < 1e-12 {
            return Rot { w: Vec2::ZERO, phi: g.phi };
        }
        Rot { w: g.v.cdiv(f), phi: g.phi }
    }

    pub fn scale(&self, s: f64) -> Rot {
        Rot { w: self.w * s, phi: self.phi * s }
    }

    pub fn add(&self, o: &Rot) -> Rot {
        Rot { w: self.w + o.w, phi: self.phi + o.phi }
    }

    pub fn sub(&self, o: &Rot) -> Rot {
        Rot { w: self.w - o.w, phi: self.phi - o.phi }
    }

    /// Euclidean norm in ℝ³.
    pub fn norm(&self) -> f64 {
        (self.w.norm_sq() + self.phi * self.phi).sqrt()
    }

    /// The map of `t·x`, the point at time `t` of the one-parameter motion.
    pub fn at(&self, t: f64) -> Isometry {
        self.scale(t).map()
    }

    /// Bound on the speed of any point `|u| ≤ r` along `t ↦ map(t·x)(u)`, `t ∈ [0, 1]`.
    pub fn point_speed(&self, r: f64) -> f64 {
        self.w.norm() + self.phi.abs() * r
    }
}

/// Class of `(w, φ)` in P².
pub fn projective_center(x: &Rot) -> Result<ProjPoint, Error> {
    if x.is_identity() {
        return Err(Error::InvalidInput("the identity has no projective center".into()));
    }
    ProjPoint::new(x.coords())
}

fn classify(g: Isometry, scale: f64) -> Rot {
    let mut g = g;
    if g.phi.abs() < ANGLE_EPS {
        g.phi = 0.0;
        if g.v.norm() <= 1e-13 * scale {
            return Rot::IDENTITY;
        }
    }
    Rot::from_isometry(&g)
}

/// `x₁ ⋆ x₂`: the motion whose map is `map(x₁) ∘ map(x₂)`.
pub fn star(x1: &Rot, x2: &Rot) -> Rot {
    let (a, b) = (x1.map(), x2.map());
    classify(a.compose(&b), a.v.norm() + b.v.norm())
}

/// The `x₂` with `x₁ ⋆ x₂ = x₃`.
pub fn star_solve_right(x3: &Rot, x1: &Rot) -> Rot {
    let (a, c) = (x1.map(), x3.map());
    let g = Isometry { phi: c.phi - a.phi, v: (c.v - a.v).rotate(-a.phi) };
    classify(g, a.v.norm() + c.v.norm())
}

/// Output of [`zigzag_split`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZigzagSplit {
    pub y0: Rot,
    pub y1: Rot,
    /// `N·y₁`, the realized replacement for `x₁`.
    pub x1_tilde: Rot,
    /// `|x̃₁ − x₁|` in ℝ³.
    pub drift: f64,
}

/// Replaces `x` by `N` copies of `y₀ ⋆ y₁` with `y₀ = x₀/N` and `y₀ ⋆ y₁ = x/N`.
pub fn zigzag_split(x: &Rot, x0: &Rot, n: u64) -> Result<ZigzagSplit, Error> {
    if n == 0 {
        return Err(Error::InvalidInput("zigzag fineness must be at least 1".into()));
    }
    let x1 = x.sub(x0);
    if x1.norm() <= 1e-15 * x.norm().max(1e-300) {
        return Err(Error::InvalidInput("zigzag split with x₀ = x".into()));
    }
    let nf = n as f64;
    let y0 = x0.scale(1.0 / nf);
    let y1 = star_solve_right(&x.scale(1.0 / nf), &y0);
    let x1_tilde = y1.scale(nf);
    Ok(ZigzagSplit { y0, y1, x1_tilde, drift: x1_tilde.sub(&x1).norm() })
}

/// `(|w₁ + w₂ − w₃|, |w₂φ₁| + |w₁φ₁| + |w₂φ₂| + |w₃φ₃|)` for `x₃ = x₁ ⋆ x₂`.
pub fn lemma52_gap(x1: &Rot, x2: &Rot) -> (f64, f64) {
    let x3 = star(x1, x2);
    let lhs = (x1.w + x2.w - x3.w).norm();
    let rhs = (x2.w * x1.phi).norm()
        + (x1.w * x1.phi).norm()
        + (x2.w * x2.phi).norm()
        + (x3.w * x3.phi).norm();
    (lhs, rhs)
}

/// A continuous motion `t ↦ start ∘ map(t·gen)`, `t ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionSegment {
    pub start: Isometry,
    pub gen: Rot,
}

impl MotionSegment {
    pub fn at(&self, t: f64) -> Isometry {
        self.start.compose(&self.gen.at(t))
    }

    pub fn end(&self) -> Isometry {
        self.start.compose(&self.gen.map())
    }

    /// Number of intervals so that no point with `|u| ≤ r` moves more than
    /// `step` between samples. Translations need one interval.
    pub fn interval_count(&self, step: f64, r: f64) -> u64 {
        if self.gen.phi == 0.0 {
            return 1;
        }
        let n = (self.gen.point_speed(r) / step).ceil();
        if n.is_finite() {
            (n as u64).max(1)
        } else {
            1
        }
    }

    /// Samples `samples[0] = start`, `samples[last] = end`.
    pub fn samples(&self, step: f64, r: f64) -> Vec<Isometry> {
        let n = self.interval_count(step, r);
        (0..=n).map(|k| if k == n { self.end() } else { self.at(k as f64 / n as f64) }).collect()
    }
}

/// One entry of an intrinsic rotation sequence, as stored in plan files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub w: [f64; 2],
    pub phi: f64,
    pub mult: u64,
}

impl PathEntry {
    pub fn new(x: &Rot, mult: u64) -> Self {
        PathEntry { w: [x.w.x, x.w.y], phi: x.phi, mult }
    }

    pub fn rot(&self) -> Rot {
        Rot::new(Vec2::new(self.w[0], self.w[1]), self.phi)
    }
}

/// Realizes an intrinsic sequence: `g₀ = id`, `g_k = g_{k−1} ∘ map(ρ_k)`.
pub fn realize_path(intrinsic: &[(Rot, u64)]) -> Vec<MotionSegment> {
    let mut g = Isometry::IDENTITY;
    let mut out = Vec::new();
    for &(x, mult) in intrinsic {
        let m = x.map();
        for _ in 0..mult {
            out.push(MotionSegment { start: g, gen: x });
            g = g.compose(&m);
        }
    }
    out
}

/// Endpoint of an intrinsic sequence.
pub fn path_endpoint(intrinsic: &[(Rot, u64)]) -> Isometry {
    let mut g = Isometry::IDENTITY;
    for &(x, mult) in intrinsic {
        let m = x.map();
        for _ in 0..mult {
            g = g.compose(&m);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn constructor_examples() {
        let x = Rot::from_center(Vec2::new(1.0, 0.0), FRAC_PI_2).unwrap();
        assert!(close(x.w, Vec2::new(FRAC_PI_2, 0.0), 1e-15));
        assert!(close(x.v(), Vec2::new(1.0, -1.0), 1e-15));
        let t = Rot::translation(Vec2::new(1.0, 0.0));
        assert_eq!((t.w, t.phi), (Vec2::new(0.0, 1.0), 0.0));
        let y = Rot::from_center(Vec2::new(2.0, 3.0), 0.1).unwrap();
        assert!(close(y.w, Vec2::new(0.2, 0.3), 1e-15));
    }

    #[test]
    fn center_examples() {
        let y = Rot::from_center(Vec2::new(2.0, 3.0), 0.1).unwrap();
        assert!(projective_center(&y).unwrap().approx_eq(&crate::geom::proj_embed(Vec2::new(2.0, 3.0)), 1e-12));
        let t = projective_center(&Rot::translation(Vec2::new(1.0, 0.0))).unwrap();
        assert!(t.approx_eq(&ProjPoint::new([0.0, 1.0, 0.0]).unwrap(), 1e-15));
        let o = projective_center(&Rot::from_center(Vec2::ZERO, 1.0).unwrap()).unwrap();
        assert!(o.approx_eq(&ProjPoint::new([0.0, 0.0, 1.0]).unwrap(), 1e-15));
        assert!(projective_center(&Rot::IDENTITY).is_err());
    }

    #[test]
    fn star_examples() {
        let a = Rot::new(Vec2::new(0.0, 1.0), 0.0);
        let b = Rot::new(Vec2::new(-1.0, 0.0), 0.0);
        let c = star(&a, &b);
        assert!(close(c.w, Vec2::new(-1.0, 1.0), 1e-15) && c.phi == 0.0);
        let z = Vec2::new(0.3, -2.0);
        let r = star(&Rot::from_center(z, 0.7).unwrap(), &Rot::from_center(z, -0.7).unwrap());
        assert!(r.is_identity());
        let r = star(
            &Rot::from_center(Vec2::new(1.0, 0.0), FRAC_PI_2).unwrap(),
            &Rot::from_center(Vec2::ZERO, FRAC_PI_2).unwrap(),
        );
        assert!((r.phi - PI).abs() < 1e-15);
        assert!(close(r.center().unwrap(), Vec2::new(0.5, -0.5), 1e-12));
    }

    #[test]
    fn solve_examples() {
        let x1 = Rot::from_center(Vec2::new(1.0, 2.0), 0.3).unwrap();
        assert!(star_solve_right(&x1, &x1).is_identity());
        let a = Rot::translation(Vec2::new(1.0, 0.0));
        let c = Rot::translation(Vec2::new(1.0, 1.0));
        assert!(close(star_solve_right(&c, &a).v(), Vec2::new(0.0, 1.0), 1e-15));
    }

    #[test]
    fn zigzag_translations_are_exact() {
        let x = Rot::translation(Vec2::new(1.0, 0.5));
        let x0 = Rot::translation(Vec2::new(0.2, 0.9));
        for n in [1, 3, 10, 1000] {
            assert!(zigzag_split(&x, &x0, n).unwrap().drift < 1e-12);
        }
        assert!(zigzag_split(&x, &x, 4).is_err());
    }

    #[test]
    fn zigzag_drift_is_first_order() {
        let x = Rot::new(Vec2::new(1.0, 0.0), 0.2);
        let x0 = Rot::new(Vec2::new(0.5, 0.0), 0.0);
        let d10 = zigzag_split(&x, &x0, 10).unwrap().drift;
        let d100 = zigzag_split(&x, &x0, 100).unwrap().drift;
        assert!(d10 > 0.0);
        let r = d10 / d100;
        assert!((8.0..12.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn lemma52_translation_gap_is_zero() {
        let (l, _) = lemma52_gap(&Rot::translation(Vec2::new(1.0, 2.0)), &Rot::translation(Vec2::new(-3.0, 0.5)));
        assert!(l < 1e-15);
        let x = Rot::from_center(Vec2::new(1.0, 0.0), 0.1).unwrap();
        let (l, r) = lemma52_gap(&x, &x);
        assert!(l <= 1.5 * r);
    }

    #[test]
    fn realize_roundtrip() {
        let x = Rot::from_center(Vec2::new(0.4, 0.1), 0.9).unwrap();
        let inv = Rot::from_isometry(&x.map().inverse());
        assert!(path_endpoint(&[(x, 1), (inv, 1)]).distance(&Isometry::IDENTITY, 1.0) < 1e-12);
        let segs = realize_path(&[(x.scale(1.0 / 7.0), 7)]);
        assert_eq!(segs.len(), 7);
        assert!(segs[6].end().distance(&x.map(), 1.0) < 1e-12);
    }

    #[test]
    fn samples_respect_step() {
        let s = MotionSegment { start: Isometry::IDENTITY, gen: Rot::from_center(Vec2::new(1.0, 0.0), 1.0).unwrap() };
        let pts = s.samples(0.01, 2.0);
        for w in pts.windows(2) {
            assert!(w[0].distance(&w[1], 2.0) <= 0.01 * 1.0001);
        }
        assert_eq!(pts[0], s.start);
    }
}
