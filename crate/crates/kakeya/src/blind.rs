//! Venetian blinds and the index tree built from them.
//!
//! A line `L` of direction `θ` is replaced by `k` nested basic zigzags with
//! bad direction `θ ∓ β` and good directions `θ ± γ, θ ± 2γ, …, θ ± kγ`. The
//! bad pieces form the child `i0`, the final good pieces the child `i1`, and
//! both children are treated the same way until a stopping rule fires.
//!
//! The tree depends only on lengths and angles. The fineness of each
//! zigzag is chosen afterwards, when the tree is realized as a path.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::geom::{
    dir_distance, normal_line, wrap_half, DirInterval, Direction, ProjLine, ProjPoint, Scene,
    INCIDENCE_TOL,
};
use crate::se2::{projective_center, zigzag_split, Rot};
use crate::Error;

/// Hard caps that turn "sufficiently fine" into an error.
pub const DEPTH_CAP: u32 = 40;
pub const FINENESS_CAP: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The `k ≥ 1` with `kγ ∈ [π/2 − 2β − γ, π/2 − 2β)`.
pub fn choose_k(beta: f64, gamma: f64) -> Result<u32, Error> {
    if !(gamma > 0.0) || gamma > beta * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!("need 0 < γ ≤ β, got β={beta}, γ={gamma}")));
    }
    let top = FRAC_PI_2 - 2.0 * beta;
    if top <= gamma {
        return Err(Error::InvalidInput(format!(
            "π/2 − 2β = {top} leaves no room for γ = {gamma}; shrink β"
        )));
    }
    let t = top / gamma;
    let mut k = (t - 1e-9).ceil() - 1.0;
    // guard against rounding at the open right end
    while k >= 1.0 && k * gamma >= top {
        k -= 1.0;
    }
    if k < 1.0 || k > u32::MAX as f64 {
        return Err(Error::InvalidInput(format!("no valid k for β={beta}, γ={gamma}")));
    }
    Ok(k as u32)
}

/// The pieces of one Venetian blind applied to a vector `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct VenetianBlind {
    pub k: u32,
    /// `bad[s-1]` is the bad vector split off at step `s`.
    pub bad: Vec<crate::geom::Vec2>,
    /// `good[s]` is `G_s`, with `good[0] = v`.
    pub good: Vec<crate::geom::Vec2>,
}

impl VenetianBlind {
    /// Vector sum of the bad part `L0`.
    pub fn bad_total(&self) -> crate::geom::Vec2 {
        self.bad.iter().fold(crate::geom::Vec2::ZERO, |a, b| a + *b)
    }

    /// `G_k`, the good part `L1`.
    pub fn good_final(&self) -> crate::geom::Vec2 {
        *self.good.last().unwrap()
    }

    pub fn bad_length(&self) -> f64 {
        self.bad.iter().map(|b| b.norm()).sum()
    }

    pub fn good_length(&self) -> f64 {
        self.good_final().norm()
    }
}

/// Splits `g` into `a ∥ ua` plus `b ∥ ub` by Cramer's rule.
fn split2(g: crate::geom::Vec2, ua: crate::geom::Vec2, ub: crate::geom::Vec2) -> (crate::geom::Vec2, crate::geom::Vec2) {
    let det = ua.cross(ub);
    let a = g.cross(ub) / det;
    let b = ua.cross(g) / det;
    (ua * a, ub * b)
}

/// Applies a Venetian blind to `v` with the given angles and sign.
pub fn venetian_blind(v: crate::geom::Vec2, beta: f64, gamma: f64, sign: Sign) -> Result<VenetianBlind, Error> {
    let k = choose_k(beta, gamma)?;
    let s = sign.value();
    let theta = v.angle();
    let ua = crate::geom::Vec2::expi(theta - s * beta);
    let mut good = vec![v];
    let mut bad = Vec::with_capacity(k as usize);
    for step in 1..=k {
        let ub = crate::geom::Vec2::expi(theta + s * step as f64 * gamma);
        let (a, b) = split2(*good.last().unwrap(), ua, ub);
        bad.push(a);
        good.push(b);
    }
    Ok(VenetianBlind { k, bad, good })
}

/// `c(β)`: the larger of the two child length ratios.
pub fn length_ratio(beta: f64, gamma: f64) -> Result<f64, Error> {
    let vb = venetian_blind(crate::geom::Vec2::new(1.0, 0.0), beta, gamma, Sign::Plus)?;
    Ok(vb.bad_length().max(vb.good_length()))
}

/// The sign that makes `I ∪ [θ, θ ± kγ]` largest.
pub fn select_sign(interval: &DirInterval, theta: Direction) -> Sign {
    match interval.offset_from_mid(theta) {
        Some(o) if o < 0.0 => Sign::Minus,
        _ => Sign::Plus,
    }
}

/// How parameters are scheduled down the tree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScheduleKind {
    /// All five parameter conditions, `ε_i = eps·4^{−|i|−1}`.
    Geometric,
    /// Bounded-size tree for desk runs: `β` starts at `beta0` and is
    /// multiplied by `beta_ratio` per good generation, `γ ≤ gamma_max`, and
    /// `ε_i = eps·ratio^{−n_i−1}` depends on good generations only.
    Desk { beta0: f64, beta_ratio: f64, gamma_max: f64 },
}

/// Schedule plus stopping and fineness knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    /// Ratio between successive `ε_i` (per generation, or per good generation for desk runs).
    pub eps_ratio: f64,
    /// Upper bound on any `β`.
    pub beta_max: f64,
    /// Stop a line once the scene's directions outside `I_i` fit in one `ε`-ball.
    pub scene_aware: bool,
    /// Multiplier on the deviation budgets `η`.
    pub eta_scale: f64,
    pub depth_cap: u32,
    /// At the depth cap, stop the node as [`Stop::Truncated`] instead of failing.
    #[serde(default)]
    pub truncate: bool,
    pub node_cap: usize,
    /// Cap on the number of realized path steps.
    pub step_cap: u64,
}

impl Schedule {
    pub fn geometric() -> Self {
        Schedule {
            kind: ScheduleKind::Geometric,
            eps_ratio: 4.0,
            beta_max: 0.7,
            scene_aware: false,
            eta_scale: 1.0,
            depth_cap: DEPTH_CAP,
            truncate: false,
            node_cap: 200_000,
            step_cap: 4_000_000,
        }
    }

    pub fn desk() -> Self {
        Schedule {
            kind: ScheduleKind::Desk { beta0: 0.5, beta_ratio: 0.5, gamma_max: 0.05 },
            eps_ratio: 2.0,
            beta_max: 0.7,
            scene_aware: true,
            eta_scale: 1.0,
            depth_cap: DEPTH_CAP,
            truncate: false,
            node_cap: 200_000,
            step_cap: 4_000_000,
        }
    }
}

/// Outcome of the stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stop {
    Continue,
    /// `H¹(L_i) ≤ ε_k`; the line is swept with an arbitrary deletion.
    Ignored,
    /// `|I_i| ≥ π − ε`, or the scene-aware test passed.
    Kept,
    /// Cut off at the depth cap with `|I_i| < π − ε`; the deletion ball
    /// does not cover the complement of `I_i`.
    Truncated,
}

/// One node of the index tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlindNode {
    /// Binary index, `""` for the root.
    pub index: String,
    pub parent: Option<usize>,
    /// `(bad, good)` children.
    pub children: Option<(usize, usize)>,
    /// Total vector of `L_i`, summed over its parallel copies.
    pub vec: crate::geom::Vec2,
    pub length: f64,
    pub dir: Direction,
    pub interval: DirInterval,
    pub beta: f64,
    pub gamma: f64,
    pub eps: f64,
    pub alpha: f64,
    pub k: u32,
    pub sign: Sign,
    pub n_ones: u32,
    pub depth: u32,
    /// Last good node among `i` and its ancestors (the root counts as good).
    pub last_good: usize,
    pub stop: Stop,
    /// Center of the deletion ball for leaves, in the direction parameter.
    pub deletion_center: Option<Direction>,
    /// Whether the leaf was stopped by the scene-aware test.
    pub scene_stop: bool,
}

impl BlindNode {
    pub fn is_good(&self) -> bool {
        self.index.ends_with('1') || self.index.is_empty()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Arcs of the direction parameter swept by each scene segment, with lengths.
///
/// For translations an arc is the single tangent direction. For rotations it
/// is the set of parameters `t` of the points `ν_x ∩ ℓ`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SceneArcs {
    /// `(start angle, signed sweep)`.
    pub arcs: Vec<(f64, f64)>,
}

impl SceneArcs {
    pub fn tangents(scene: &Scene) -> Self {
        SceneArcs { arcs: scene.segments().iter().map(|s| (s.dir.angle(), 0.0)).collect() }
    }

    /// Parameters of `ν_x ∩ ℓ` on `ℓ` in the frame `t ↦ Q(cos t, sin t, 0)`.
    pub fn normals(scene: &Scene, q: &Matrix3<f64>) -> Self {
        let e1 = q.column(0).into_owned();
        let e2 = q.column(1).into_owned();
        let lv = q.column(2).into_owned();
        let param = |p: Vector3<f64>| -> f64 { p.dot(&e2).atan2(p.dot(&e1)) };
        let mut arcs = Vec::with_capacity(scene.segments().len());
        for s in scene.segments() {
            let pts = [s.a, (s.a + s.b) * 0.5, s.b];
            let ts: Vec<Option<f64>> = pts
                .iter()
                .map(|x| {
                    let p = normal_line(*x, s.dir).vec().cross(&lv);
                    if p.norm() < INCIDENCE_TOL {
                        None
                    } else {
                        Some(param(p))
                    }
                })
                .collect();
            match (ts[0], ts[1], ts[2]) {
                (Some(t0), Some(tm), Some(t1)) => {
                    let d1 = wrap_half(tm - t0);
                    let d2 = wrap_half(t1 - tm);
                    arcs.push((t0, d1 + d2));
                }
                // the normal line is ℓ itself: every parameter is hit
                _ => arcs.push((0.0, PI)),
            }
        }
        SceneArcs { arcs }
    }

    /// A center `c` such that every arc lies in `I ∪ B(c, eps)`, if one exists.
    /// Offsets `(lo, hi)` from the gap center `g` spanning every scene
    /// direction outside `interval`; `None` when all are inside.
    fn uncovered(&self, interval: &DirInterval) -> Option<(Direction, f64, f64)> {
        let g = interval.gap_center()?;
        let h = interval.gap_halfwidth();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(start, sweep) in &self.arcs {
            if sweep.abs() >= PI - 1e-12 {
                lo = lo.min(-h);
                hi = hi.max(h);
                continue;
            }
            let o0 = wrap_half(start - g.angle());
            let (a, b) = if sweep >= 0.0 { (o0, o0 + sweep) } else { (o0 + sweep, o0) };
            for m in [-1.0, 0.0, 1.0] {
                let c = m * PI;
                let (x0, x1) = (a.max(c - h), b.min(c + h));
                if x0 < x1 || (x0 == x1 && (x0 - c).abs() < h) {
                    lo = lo.min(x0 - c);
                    hi = hi.max(x1 - c);
                }
            }
        }
        (lo <= hi).then_some((g, lo, hi))
    }

    /// Width of the smallest arc of the gap holding every scene direction outside `interval`.
    pub fn uncovered_width(&self, interval: &DirInterval) -> f64 {
        match interval {
            DirInterval::Full => 0.0,
            _ => self.uncovered(interval).map_or(0.0, |(_, lo, hi)| hi - lo),
        }
    }

    /// Middle of the uncovered scene directions, or the gap center when none are uncovered.
    pub fn middle_uncovered(&self, interval: &DirInterval) -> Option<Direction> {
        let g = interval.gap_center()?;
        Some(match self.uncovered(interval) {
            Some((g, lo, hi)) => Direction::new(g.angle() + (lo + hi) / 2.0),
            None => g,
        })
    }

    pub fn stop_center(&self, interval: &DirInterval, eps: f64) -> Option<Direction> {
        let g = interval.gap_center()?;
        match self.uncovered(interval) {
            None => Some(g),
            Some((g, lo, hi)) if (hi - lo) / 2.0 < eps * (1.0 - 1e-9) => {
                Some(Direction::new(g.angle() + (lo + hi) / 2.0))
            }
            _ => None,
        }
    }
}

/// Prefers the sign whose good child passes the scene-aware stop at `eps`
/// (the one leaving less uncovered if both do). Otherwise the sign whose bad
/// child widens `I` more, so bad chains keep turning the same way; ties go
/// to [`select_sign`].
pub fn select_sign_scene(interval: &DirInterval, theta: Direction, beta: f64, gamma: f64, eps: f64, arcs: &SceneArcs) -> Sign {
    let plain = select_sign(interval, theta);
    let Ok(k) = choose_k(beta, gamma) else { return plain };
    let grow = |end: f64| DirInterval::bracket(theta, Direction::new(end)).and_then(|b| interval.union(&b)).ok();
    let key = |s: Sign| {
        let good = grow(theta.angle() + s.value() * k as f64 * gamma);
        let bad = grow(theta.angle() - s.value() * beta);
        let stops = good.is_some_and(|i| arcs.stop_center(&i, eps).is_some());
        let width = good.map_or(f64::INFINITY, |i| arcs.uncovered_width(&i));
        (stops, width, bad.map_or(0.0, |i| i.length()))
    };
    let (p, m) = (key(Sign::Plus), key(Sign::Minus));
    match (p.0, m.0) {
        (true, false) => return Sign::Plus,
        (false, true) => return Sign::Minus,
        (true, true) if (p.1 - m.1).abs() > 1e-12 => {
            return if p.1 < m.1 { Sign::Plus } else { Sign::Minus };
        }
        _ => {}
    }
    if (p.2 - m.2).abs() > 1e-12 {
        return if p.2 > m.2 { Sign::Plus } else { Sign::Minus };
    }
    plain
}

/// The binary index tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlindTree {
    pub nodes: Vec<BlindNode>,
    pub eps: f64,
    pub schedule: Schedule,
}

/// `(β_i, γ_i, ε_i)` for a new node given its parent, length and `n_i`.
pub fn schedule_params(
    schedule: &Schedule,
    eps_global: f64,
    parent: Option<&BlindNode>,
    is_good: bool,
    depth: u32,
    n_ones: u32,
    length: f64,
) -> (f64, f64, f64) {
    let generations = match schedule.kind {
        ScheduleKind::Geometric => depth,
        ScheduleKind::Desk { .. } => n_ones,
    };
    let eps_i = eps_global * schedule.eps_ratio.powi(-(generations as i32) - 1);
    let parent_beta = parent.map_or(schedule.beta_max, |p| p.beta);
    let ratio = if length > 0.0 { eps_i / length } else { f64::INFINITY };
    match schedule.kind {
        ScheduleKind::Geometric => {
            let beta = if is_good {
                let cap_n = if n_ones == 0 { f64::INFINITY } else { 1.0 / n_ones as f64 };
                parent_beta.min(cap_n).min(ratio).min(schedule.beta_max)
            } else {
                parent_beta
            };
            let gamma = beta.min(ratio);
            (beta, gamma, eps_i)
        }
        ScheduleKind::Desk { beta0, beta_ratio, gamma_max } => {
            let beta = if is_good {
                parent_beta.min(beta0 * beta_ratio.powi(n_ones as i32)).min(schedule.beta_max)
            } else {
                parent_beta
            };
            let gamma = beta.min(gamma_max);
            (beta, gamma, eps_i)
        }
    }
}

/// The stopping rule for a node whose parameters are set.
pub fn stopping_rule(
    tree_eps_of_last_good: f64,
    node: &BlindNode,
    eps: f64,
    arcs: Option<&SceneArcs>,
) -> (Stop, Option<Direction>, bool) {
    if node.length <= tree_eps_of_last_good {
        let c = node.interval.gap_center().unwrap_or(node.dir);
        return (Stop::Ignored, Some(c), false);
    }
    if node.interval.length() >= PI - eps {
        let c = node.interval.gap_center().unwrap_or(node.dir);
        return (Stop::Kept, Some(c), false);
    }
    if let Some(a) = arcs {
        if let Some(c) = a.stop_center(&node.interval, eps) {
            return (Stop::Kept, Some(c), true);
        }
    }
    (Stop::Continue, None, false)
}

impl BlindTree {
    /// Builds the tree for a root vector. `arcs` enables the scene-aware stop.
    pub fn build(root: crate::geom::Vec2, eps: f64, schedule: Schedule, arcs: Option<&SceneArcs>) -> Result<Self, Error> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidInput("eps must be positive".into()));
        }
        if !(root.norm() > 0.0) || !root.is_finite() {
            return Err(Error::InvalidInput("target must be a nonzero finite vector".into()));
        }
        let arcs = if schedule.scene_aware { arcs } else { None };
        let length = root.norm();
        let (beta, gamma, eps_i) = schedule_params(&schedule, eps, None, true, 0, 0, length);
        let mut nodes = vec![BlindNode {
            index: String::new(),
            parent: None,
            children: None,
            vec: root,
            length,
            dir: Direction::of(root),
            interval: DirInterval::Empty,
            beta,
            gamma,
            eps: eps_i,
            alpha: 0.0,
            k: 0,
            sign: Sign::Plus,
            n_ones: 0,
            depth: 0,
            last_good: 0,
            stop: Stop::Continue,
            deletion_center: None,
            scene_stop: false,
        }];
        // The root is never ignored: its "last good" is itself.
        let (stop, c, ss) = stopping_rule(0.0, &nodes[0], eps, arcs);
        nodes[0].stop = stop;
        nodes[0].deletion_center = c;
        nodes[0].scene_stop = ss;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if nodes[id].stop != Stop::Continue {
                continue;
            }
            if nodes[id].depth >= schedule.depth_cap && schedule.truncate {
                let n = &mut nodes[id];
                n.stop = Stop::Truncated;
                let c = arcs.and_then(|a| a.middle_uncovered(&n.interval));
                n.deletion_center = Some(c.or(n.interval.gap_center()).unwrap_or(n.dir));
                continue;
            }
            if nodes[id].depth >= schedule.depth_cap {
                return Err(Error::Infeasible(format!(
                    "depth cap {} reached at node {:?}",
                    schedule.depth_cap, nodes[id].index
                )));
            }
            if nodes.len() + 2 > schedule.node_cap {
                return Err(Error::Infeasible(format!("node cap {} reached", schedule.node_cap)));
            }
            let (beta, gamma) = (nodes[id].beta, nodes[id].gamma);
            let sign = match arcs {
                Some(a) => select_sign_scene(&nodes[id].interval, nodes[id].dir, beta, gamma, eps, a),
                None => select_sign(&nodes[id].interval, nodes[id].dir),
            };
            let vb = venetian_blind(nodes[id].vec, beta, gamma, sign).map_err(|e| {
                Error::Infeasible(format!("node {:?}: {e}", nodes[id].index))
            })?;
            nodes[id].k = vb.k;
            nodes[id].sign = sign;
            let parent = nodes[id].clone();
            let mut kids = [0usize; 2];
            for (bit, v) in [(0u8, vb.bad_total()), (1u8, vb.good_final())] {
                let is_good = bit == 1;
                let dir = Direction::of(v);
                let interval = parent
                    .interval
                    .union(&DirInterval::bracket(parent.dir, dir)?)?;
                let n_ones = parent.n_ones + bit as u32;
                let depth = parent.depth + 1;
                let length = v.norm();
                let (b, g, e) = schedule_params(&schedule, eps, Some(&parent), is_good, depth, n_ones, length);
                let id_new = nodes.len();
                let last_good = if is_good { id_new } else { parent.last_good };
                let mut node = BlindNode {
                    index: format!("{}{}", parent.index, bit),
                    parent: Some(id),
                    children: None,
                    vec: v,
                    length,
                    dir,
                    interval,
                    beta: b,
                    gamma: g,
                    eps: e,
                    alpha: if is_good { parent.gamma } else { parent.beta },
                    k: 0,
                    sign: Sign::Plus,
                    n_ones,
                    depth,
                    last_good,
                    stop: Stop::Continue,
                    deletion_center: None,
                    scene_stop: false,
                };
                let eps_k = if is_good { e } else { nodes[parent.last_good].eps };
                let (stop, c, ss) = stopping_rule(eps_k, &node, eps, arcs);
                node.stop = stop;
                node.deletion_center = c;
                node.scene_stop = ss;
                nodes.push(node);
                kids[bit as usize] = id_new;
            }
            nodes[id].children = Some((kids[0], kids[1]));
            stack.push(kids[1]);
            stack.push(kids[0]);
        }
        Ok(BlindTree { nodes, eps, schedule })
    }

    pub fn root(&self) -> &BlindNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &BlindNode)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_leaf())
    }

    /// Leaf vectors sum to the root vector.
    pub fn leaf_sum(&self) -> crate::geom::Vec2 {
        self.leaves().fold(crate::geom::Vec2::ZERO, |a, (_, n)| a + n.vec)
    }

    /// `Σ_i ε_i` over all nodes.
    pub fn eps_sum(&self) -> f64 {
        self.nodes.iter().map(|n| n.eps).sum()
    }

    /// Total length of the realized path.
    pub fn path_length(&self) -> f64 {
        self.leaves().map(|(_, n)| n.length).sum()
    }

    /// Violations of `π − |I_i| ≤ (π − |I_m|)/2 + 2β_m + slack·γ_m`, where `m`
    /// is the second-to-last good node above `i`.
    pub fn gap_chain_violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        for n in &self.nodes {
            let k = n.last_good;
            if k == 0 {
                continue;
            }
            let Some(kp) = self.nodes[k].parent else { continue };
            let m = self.nodes[kp].last_good;
            let lhs = PI - n.interval.length();
            let mm = &self.nodes[m];
            let rhs = (PI - mm.interval.length()) / 2.0 + 2.0 * mm.beta + slack * mm.gamma;
            if lhs > rhs + 1e-9 {
                out.push(format!("{:?}: {lhs} > {rhs}", n.index));
            }
        }
        out
    }

    /// Every kept leaf without the scene-aware flag has `P¹ ∖ B(c, ε) ⊆ I`.
    pub fn kept_leaves_covered(&self) -> bool {
        self.leaves().all(|(_, n)| {
            if n.stop != Stop::Kept || n.scene_stop {
                return true;
            }
            let c = n.deletion_center.unwrap();
            match n.interval {
                DirInterval::Full => true,
                DirInterval::Empty => self.eps >= FRAC_PI_2,
                DirInterval::Arc { .. } => {
                    let g = n.interval.gap_center().unwrap();
                    dir_distance(g, c) + n.interval.gap_halfwidth() < self.eps + 1e-12
                }
            }
        })
    }

    /// Ratio `Λ_i/ℓ_i` of realized leaf length to node length, per node.
    fn stretch(&self) -> Vec<f64> {
        let mut s = vec![1.0; self.nodes.len()];
        for id in (0..self.nodes.len()).rev() {
            if let Some((b, g)) = self.nodes[id].children {
                let lam = s[b] * self.nodes[b].length + s[g] * self.nodes[g].length;
                s[id] = lam / self.nodes[id].length;
            }
        }
        s
    }
}

/// The linear rotation of ℝ³ with `Q(v, 0) = x` that maps the plane `φ = 0`
/// onto the plane of `ℓ`.
pub fn lift_rotation_q(v: crate::geom::Vec2, x: &Rot, line: &ProjLine) -> Result<Matrix3<f64>, Error> {
    let xv = Vector3::from(x.coords());
    let xn = xv.norm();
    if !(xn > 0.0) {
        return Err(Error::InvalidInput("cannot lift the identity".into()));
    }
    if (v.norm() - xn).abs() > 1e-9 * xn.max(1.0) {
        return Err(Error::Precondition(format!("|v| = {} differs from |x| = {}", v.norm(), xn)));
    }
    let n = line.vec();
    if (xv / xn).dot(&n).abs() > INCIDENCE_TOL {
        return Err(Error::Precondition("ℓ does not pass through the projective center".into()));
    }
    let xh = xv / xn;
    let n = (n - xh * xh.dot(&n)).normalize();
    let frame = Matrix3::from_columns(&[xh, n.cross(&xh), n]);
    let a = v.angle();
    let (s, c) = a.sin_cos();
    let rz = Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0);
    Ok(frame * rz)
}

fn apply_q(q: &Matrix3<f64>, v: crate::geom::Vec2) -> Rot {
    let r = q * Vector3::new(v.x, v.y, 0.0);
    Rot::from_coords([r.x, r.y, r.z])
}

/// Deletion applied to the scene while a leaf's steps run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Deletion {
    /// Points with tangent in `B(center, radius)`.
    Tangent { center: Direction, radius: f64 },
    /// Points whose normal line meets `ℓ` inside `B(u, radius)`.
    Normal { u: ProjPoint, radius: f64 },
}

/// One realized step: `mult` copies of the intrinsic motion `x`, run by leaf `leaf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub x: Rot,
    pub mult: u64,
    pub leaf: u32,
}

/// Leaf data of a plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanLeaf {
    pub node: usize,
    pub index: String,
    pub stop: Stop,
    pub scene_stop: bool,
    pub length: f64,
    pub deletion: Deletion,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum JKind {
    Root,
    Good(u32),
    Bad(u32),
}

/// One basic zigzag of the realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZigzagRecord {
    /// Index-tree node whose blind this zigzag belongs to.
    pub node: usize,
    pub step: u32,
    pub fineness: u64,
    /// Number of copies of the zigzagged piece.
    pub multiplicity: u64,
    /// `|x̃ − x|` of the good output, zero for translations.
    pub drift: f64,
}

/// Nominal and realized center of one piece in rotation mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterRecord {
    pub node: usize,
    pub kind: JKind,
    pub z: ProjPoint,
    pub z_tilde: ProjPoint,
    /// `proj_distance(z, z̃)`.
    pub shift: f64,
    pub alpha: f64,
    /// `proj_distance` from `z̃` to `ℓ`.
    pub line_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PlanMode {
    Translation,
    Rotation { line: ProjLine, q: [[f64; 3]; 3] },
}

/// A realized path with per-leaf deletions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionPlan {
    pub mode: PlanMode,
    pub target: Rot,
    pub eps: f64,
    pub steps: Vec<PlanStep>,
    pub leaves: Vec<PlanLeaf>,
    pub tree: BlindTree,
    pub zigzags: Vec<ZigzagRecord>,
    pub centers: Vec<CenterRecord>,
    /// `r` used to bound rotation drift.
    pub drift_budget: f64,
    /// `2·Σε_k·H¹(E)` plus `H¹(E)·Σ H¹(L_i)` over ignored leaves.
    pub certified_budget: f64,
}

impl MotionPlan {
    pub fn step_count(&self) -> u64 {
        self.steps.iter().map(|s| s.mult).sum()
    }

    /// Path length `Σ |w|` over all steps (equal to `H¹(P)` for translations).
    pub fn path_length(&self) -> f64 {
        self.steps.iter().map(|s| s.x.w.norm() * s.mult as f64).sum()
    }

    /// Composition of all steps.
    pub fn endpoint(&self) -> crate::se2::Isometry {
        let seq: Vec<(Rot, u64)> = self.steps.iter().map(|s| (s.x, s.mult)).collect();
        crate::se2::path_endpoint(&seq)
    }

    /// Translation endpoint by exact vector summation.
    pub fn translation_endpoint(&self) -> crate::geom::Vec2 {
        let mut acc = crate::geom::Vec2::ZERO;
        for s in &self.steps {
            acc += s.x.v() * s.mult as f64;
        }
        acc
    }

    pub fn deletion_of(&self, step: &PlanStep) -> Deletion {
        self.leaves[step.leaf as usize].deletion
    }
}

/// Options for plan building.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub schedule: Schedule,
    /// Multiply every chosen fineness by this power of two.
    pub fineness_multiplier: u64,
    /// Keep the rotation center outside every closed deletion ball.
    pub avoid_center: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { schedule: Schedule::desk(), fineness_multiplier: 1, avoid_center: false }
    }
}

/// Inputs to [`fineness_controller`].
#[derive(Clone, Copy, Debug)]
pub struct FinenessInput {
    /// Actual motion of one copy of the piece being zigzagged.
    pub copy: Rot,
    /// `x₀` of the zigzag for one copy (the first-direction part).
    pub first: Rot,
    /// Allowed sup-norm deviation of the zigzag from the straight motion.
    pub deviation_budget: f64,
    /// Radius of the scene, for orbit distances.
    pub radius: f64,
    /// `(copy length of a child before division, largest allowed)`.
    pub child_caps: [(f64, f64); 2],
    /// `(multiplicity of the piece, nominal x₁ per copy, drift budget)` in rotation mode.
    pub drift: Option<(u64, Rot, f64)>,
}

/// Sup over probe orbits of the distance between the zigzag's corner
/// `x₀/N` and the straight motion `t ↦ map(t·copy/N)`.
pub fn zigzag_deviation(copy: &Rot, first: &Rot, n: u64, radius: f64) -> f64 {
    let nf = n as f64;
    let corner = first.scale(1.0 / nf).map();
    let step = copy.scale(1.0 / nf);
    let f = |t: f64| corner.distance(&step.at(t), radius);
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let t = (a + b) / 2.0;
    f(t).min(f(0.0)).min(f(1.0))
}

/// Smallest power of two meeting the deviation, size and drift budgets.
pub fn fineness_controller(inp: &FinenessInput) -> Result<u64, Error> {
    let mut n: u64 = 1;
    loop {
        let nf = n as f64;
        let mut ok = zigzag_deviation(&inp.copy, &inp.first, n, inp.radius) <= inp.deviation_budget;
        for (len, cap) in inp.child_caps {
            ok &= len / nf <= cap;
        }
        if ok {
            if let Some((m, x1, r)) = inp.drift {
                let sp = zigzag_split(&inp.copy, &inp.first, n)?;
                let d = sp.x1_tilde.sub(&x1).scale(m as f64).norm();
                ok &= d < r;
            }
        }
        if ok {
            return Ok(n);
        }
        if n >= FINENESS_CAP {
            return Err(Error::Infeasible(format!("fineness above {FINENESS_CAP} required")));
        }
        n *= 2;
    }
}

struct JNode {
    node: usize,
    kind: JKind,
    /// Nominal total vector in translation coordinates.
    v: crate::geom::Vec2,
    /// Actual total motion `x̃` (equal to `Q v` for translations).
    x: Rot,
    m: u64,
    n: u64,
    children: Option<(usize, usize)>,
}

struct Realizer<'a> {
    tree: &'a BlindTree,
    q: Option<Matrix3<f64>>,
    radius: f64,
    scene_length: f64,
    stretch: Vec<f64>,
    drift_budget: f64,
    mult: u64,
    jnodes: Vec<JNode>,
    zigzags: Vec<ZigzagRecord>,
    /// Leaf steps found so far.
    steps: u64,
}

impl<'a> Realizer<'a> {
    fn lift(&self, v: crate::geom::Vec2) -> Rot {
        match &self.q {
            Some(q) => apply_q(q, v),
            None => Rot::translation(v),
        }
    }

    fn boundary(&self, node: usize) -> f64 {
        2.0 * self.scene_length + 2.0 * self.tree.nodes[node].length
    }

    /// Largest copy length of a piece rooted at `node` (unbounded for leaves).
    fn root_cap(&self, node: usize) -> f64 {
        let nd = &self.tree.nodes[node];
        if nd.is_leaf() || node == 0 {
            return f64::INFINITY;
        }
        let eta = self.tree.schedule.eta_scale * nd.eps / (2.0 * self.boundary(node));
        2.0 * eta / self.stretch[node]
    }

    fn good_cap(&self, node: usize, s: u32, vb: &VenetianBlind) -> f64 {
        let nd = &self.tree.nodes[node];
        let (b, g) = nd.children.unwrap();
        let eta = self.tree.schedule.eta_scale * nd.eps / (2.0 * nd.k as f64 * self.boundary(node));
        let rest_bad: f64 = vb.bad[s as usize..].iter().map(|a| a.norm()).sum();
        let gl = vb.good[s as usize].norm();
        let lam = self.stretch[b] * rest_bad + self.stretch[g] * vb.good_length();
        2.0 * eta / (lam / gl)
    }

    fn push(&mut self, j: JNode) -> usize {
        self.jnodes.push(j);
        self.jnodes.len() - 1
    }

    /// Expands a j-node that is a piece of `L_node`.
    fn expand_root(&mut self, jid: usize) -> Result<(), Error> {
        let node = self.jnodes[jid].node;
        let nd = &self.tree.nodes[node];
        if nd.is_leaf() {
            self.steps = self.steps.saturating_add(self.jnodes[jid].m);
            if self.steps > self.tree.schedule.step_cap {
                return Err(Error::Infeasible(format!(
                    "realized path needs more than {} steps",
                    self.tree.schedule.step_cap
                )));
            }
            return Ok(());
        }
        let (bad_child, good_child) = nd.children.unwrap();
        let unit = venetian_blind(crate::geom::Vec2::new(1.0, 0.0).rotate(nd.vec.angle()), nd.beta, nd.gamma, nd.sign)?;
        let mut cur = jid;
        for s in 1..=nd.k {
            let (v, x, m) = (self.jnodes[cur].v, self.jnodes[cur].x, self.jnodes[cur].m);
            let g_prev = unit.good[(s - 1) as usize];
            let scale = v.norm() / g_prev.norm();
            let a_tot = unit.bad[(s - 1) as usize] * scale;
            let b_tot = unit.good[s as usize] * scale;
            let mf = m as f64;
            let copy = x.scale(1.0 / mf);
            let first = self.lift(a_tot).scale(1.0 / mf);
            let mut caps = [(b_tot.norm() / mf, self.good_cap(node, s, &unit)), (a_tot.norm() / mf, self.root_cap(bad_child))];
            if s == nd.k {
                caps[0].1 = caps[0].1.min(self.root_cap(good_child));
            }
            let drift = self.q.map(|_| (m, self.lift(b_tot).scale(1.0 / mf), self.drift_budget));
            let inp = FinenessInput {
                copy,
                first,
                deviation_budget: f64::INFINITY,
                radius: self.radius,
                child_caps: caps,
                drift,
            };
            let mut n = fineness_controller(&inp)?;
            n = n.saturating_mul(self.mult).min(FINENESS_CAP);
            let m_child = m.checked_mul(n).ok_or_else(|| Error::Infeasible("multiplicity overflow".into()))?;
            let (x0_tot, x1_tot, drift_v) = match self.q {
                None => (Rot::translation(a_tot), Rot::translation(b_tot), 0.0),
                Some(_) => {
                    let sp = zigzag_split(&copy, &first, n)?;
                    let x1t = sp.y1.scale(m_child as f64);
                    let d = x1t.sub(&self.lift(b_tot)).norm();
                    (self.lift(a_tot), x1t, d)
                }
            };
            self.zigzags.push(ZigzagRecord { node, step: s, fineness: n, multiplicity: m, drift: drift_v });
            let j0 = self.push(JNode { node: bad_child, kind: JKind::Bad(s), v: a_tot, x: x0_tot, m: m_child, n: 1, children: None });
            let next_node = if s == nd.k { good_child } else { node };
            let j1 = self.push(JNode { node: next_node, kind: JKind::Good(s), v: b_tot, x: x1_tot, m: m_child, n: 1, children: None });
            self.jnodes[cur].n = n;
            self.jnodes[cur].children = Some((j0, j1));
            self.expand_root(j0)?;
            cur = j1;
        }
        self.expand_root(cur)
    }

    fn count_steps(&self) -> u64 {
        self.jnodes
            .iter()
            .filter(|j| j.children.is_none())
            .map(|j| j.m)
            .fold(0u64, |a, b| a.saturating_add(b))
    }

    fn emit(&self, jid: usize, leaf_of: &[u32], out: &mut Vec<PlanStep>) {
        let j = &self.jnodes[jid];
        match j.children {
            None => {
                let x = j.x.scale(1.0 / j.m as f64);
                let leaf = leaf_of[j.node];
                if let Some(last) = out.last_mut() {
                    if last.leaf == leaf && last.x == x {
                        last.mult += 1;
                        return;
                    }
                }
                out.push(PlanStep { x, mult: 1, leaf });
            }
            Some((a, b)) => {
                for _ in 0..j.n {
                    self.emit(a, leaf_of, out);
                    self.emit(b, leaf_of, out);
                }
            }
        }
    }
}

fn realize(
    tree: BlindTree,
    scene: &Scene,
    mode: PlanMode,
    q: Option<Matrix3<f64>>,
    target: Rot,
    eps: f64,
    opts: &PlanOptions,
    deletion_for: impl Fn(Direction) -> Deletion,
) -> Result<MotionPlan, Error> {
    let stretch = tree.stretch();
    let root_v = tree.root().vec;
    let mut rz = Realizer {
        tree: &tree,
        q,
        radius: scene.bounding_radius(),
        scene_length: scene.total_length(),
        stretch,
        drift_budget: f64::INFINITY,
        mult: opts.fineness_multiplier.max(1),
        jnodes: Vec::new(),
        zigzags: Vec::new(),
        steps: 0,
    };
    if q.is_some() {
        rz.drift_budget = drift_budget(&tree, q.as_ref().unwrap(), eps);
    }
    let x_root = match q {
        Some(_) => target,
        None => Rot::translation(root_v),
    };
    rz.push(JNode { node: 0, kind: JKind::Root, v: root_v, x: x_root, m: 1, n: 1, children: None });
    rz.expand_root(0)?;
    let total = rz.count_steps();
    if total > tree.schedule.step_cap {
        return Err(Error::Infeasible(format!(
            "realized path needs {total} steps, above the cap {}",
            tree.schedule.step_cap
        )));
    }
    let mut leaf_of = vec![u32::MAX; tree.nodes.len()];
    let mut leaves = Vec::new();
    for (id, n) in tree.leaves() {
        leaf_of[id] = leaves.len() as u32;
        leaves.push(PlanLeaf {
            node: id,
            index: n.index.clone(),
            stop: n.stop,
            scene_stop: n.scene_stop,
            length: n.length,
            deletion: deletion_for(n.deletion_center.unwrap_or(n.dir)),
        });
    }
    let mut steps = Vec::new();
    rz.emit(0, &leaf_of, &mut steps);
    let mut centers = Vec::new();
    if let (Some(qm), PlanMode::Rotation { line, .. }) = (q.as_ref(), &mode) {
        for j in &rz.jnodes {
            let nominal = apply_q(qm, j.v);
            if nominal.is_identity() || j.x.is_identity() {
                continue;
            }
            let z = projective_center(&nominal)?;
            let zt = projective_center(&j.x)?;
            centers.push(CenterRecord {
                node: j.node,
                kind: j.kind,
                z,
                z_tilde: zt,
                shift: crate::geom::proj_distance(&z, &zt),
                alpha: if matches!(j.kind, JKind::Root) && j.node == 0 { 0.0 } else { piece_alpha(&tree, j) },
                line_distance: line.distance_to(&zt),
            });
        }
    }
    let h1 = scene.total_length();
    let ignored: f64 = tree.leaves().filter(|(_, n)| n.stop == Stop::Ignored).map(|(_, n)| n.length).sum();
    let certified_budget = 2.0 * tree.eps_sum() * h1 + h1 * ignored;
    let zigzags = std::mem::take(&mut rz.zigzags);
    let drift_budget = rz.drift_budget;
    Ok(MotionPlan {
        mode,
        target,
        eps,
        steps,
        leaves,
        tree,
        zigzags,
        centers,
        drift_budget,
        certified_budget,
    })
}

/// `α` of the child a piece belongs to.
fn piece_alpha(tree: &BlindTree, j: &JNode) -> f64 {
    match j.kind {
        JKind::Root => tree.nodes[j.node].alpha,
        JKind::Bad(_) => tree.nodes[j.node].alpha,
        JKind::Good(_) => {
            let nd = &tree.nodes[j.node];
            // a G_s piece inside the blind of `j.node` belongs to its good child
            match nd.children {
                Some((_, g)) => tree.nodes[g].alpha,
                None => nd.alpha,
            }
        }
    }
}

/// `r` such that every `B(x_j, r)` projects into `B(z_j, 2α_j) ∩ B(ℓ, ε)`,
/// and `r ≤ ½ min |x_j|`.
fn drift_budget(tree: &BlindTree, q: &Matrix3<f64>, eps: f64) -> f64 {
    let mut r = f64::INFINITY;
    for n in &tree.nodes {
        let x = apply_q(q, n.vec).norm();
        r = r.min(0.5 * x);
        let ang = if n.parent.is_none() { eps } else { (2.0 * n.alpha).min(eps) };
        r = r.min(x * ang.min(FRAC_PI_2).sin());
        if let Some((_, g)) = n.children {
            // G_s pieces of this blind have length between |G_k| and |L_i|
            let gl = tree.nodes[g].length;
            r = r.min(gl * (2.0 * tree.nodes[g].alpha).min(eps).min(FRAC_PI_2).sin());
        }
    }
    r * (1.0 - 1e-9)
}

/// Builds and realizes a plan of translations from the origin to `target`.
pub fn build_translation_plan(scene: &Scene, target: crate::geom::Vec2, eps: f64, opts: &PlanOptions) -> Result<MotionPlan, Error> {
    let arcs = SceneArcs::tangents(scene);
    let tree = BlindTree::build(target, eps, opts.schedule, Some(&arcs))?;
    realize(tree, scene, PlanMode::Translation, None, Rot::translation(target), eps, opts, |c| {
        Deletion::Tangent { center: c, radius: eps }
    })
}

/// Builds and realizes a plan of intrinsic rotations from the identity to
/// `map(x)` whose centers stay near `ℓ`.
pub fn build_rotation_plan(scene: &Scene, x: &Rot, line: &ProjLine, eps: f64, opts: &PlanOptions) -> Result<MotionPlan, Error> {
    let xn = x.norm();
    let v = crate::geom::Vec2::new(xn, 0.0);
    let q = lift_rotation_q(v, x, line)?;
    let arcs = SceneArcs::normals(scene, &q);
    let center = projective_center(x)?;
    let mut tree = BlindTree::build(v, eps, opts.schedule, Some(&arcs))?;
    let param_of = |p: &ProjPoint| -> f64 {
        let pv = p.vec();
        pv.dot(&q.column(1).into_owned()).atan2(pv.dot(&q.column(0).into_owned()))
    };
    if opts.avoid_center {
        // move each center within its slack so the closed ball misses z
        let tz = Direction::new(param_of(&center));
        for n in tree.nodes.iter_mut().filter(|n| n.is_leaf()) {
            let Some(c) = n.deletion_center else { continue };
            if dir_distance(c, tz) > eps {
                continue;
            }
            let slack = (eps - n.interval.gap_halfwidth()).max(0.0);
            let off = c.offset_to(tz);
            let shift = -off.signum() * slack;
            let moved = Direction::new(c.angle() + shift);
            if dir_distance(moved, tz) > eps {
                n.deletion_center = Some(moved);
            }
        }
    }
    let qa = [
        [q[(0, 0)], q[(0, 1)], q[(0, 2)]],
        [q[(1, 0)], q[(1, 1)], q[(1, 2)]],
        [q[(2, 0)], q[(2, 1)], q[(2, 2)]],
    ];
    let qq = q;
    realize(tree, scene, PlanMode::Rotation { line: *line, q: qa }, Some(q), *x, eps, opts, move |c| {
        let u = qq * Vector3::new(c.angle().cos(), c.angle().sin(), 0.0);
        Deletion::Normal { u: ProjPoint { h: [u.x, u.y, u.z] }, radius: eps }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    #[test]
    fn choose_k_examples() {
        assert_eq!(choose_k(PI / 20.0, PI / 20.0).unwrap(), 7);
        assert_eq!(choose_k(PI / 8.0, PI / 100.0).unwrap(), 24);
        assert!(choose_k(PI / 4.0, PI / 4.0).is_err());
    }

    #[test]
    fn blind_telescopes() {
        let v = Vec2::new(0.3, -1.2);
        let vb = venetian_blind(v, 0.2, 0.05, Sign::Minus).unwrap();
        let sum = vb.bad_total() + vb.good_final();
        assert!((sum - v).norm() < 1e-14);
        assert!(vb.bad_length() < v.norm() && vb.good_length() < v.norm());
    }

    #[test]
    fn sign_examples() {
        let i = DirInterval::bracket(Direction::new(0.0), Direction::new(0.4)).unwrap();
        assert_eq!(select_sign(&i, Direction::new(0.3)), Sign::Plus);
        assert_eq!(select_sign(&i, Direction::new(0.1)), Sign::Minus);
        assert_eq!(select_sign(&DirInterval::Empty, Direction::new(0.1)), Sign::Plus);
    }

    #[test]
    fn huge_eps_gives_single_segment() {
        let s = Scene::circle(1.0, 72).unwrap();
        let p = build_translation_plan(&s, Vec2::new(2.0, 0.0), 10.0, &PlanOptions::default()).unwrap();
        assert_eq!(p.steps.len(), 1);
        assert_eq!(p.translation_endpoint(), Vec2::new(2.0, 0.0));
    }

    #[test]
    fn q_maps_x_and_plane() {
        let x = Rot::from_center(Vec2::new(1.0, 0.0), FRAC_PI_2).unwrap();
        let z = crate::geom::proj_embed(Vec2::new(1.0, 0.0));
        let line = ProjLine::through(&z, &ProjPoint::new([0.0, 1.0, 0.0]).unwrap()).unwrap();
        let v = Vec2::new(x.norm(), 0.0);
        let q = lift_rotation_q(v, &x, &line).unwrap();
        let img = q * Vector3::new(v.x, v.y, 0.0);
        assert!((img - Vector3::from(x.coords())).norm() < 1e-12);
        for t in [0.0, 0.7, 2.0] {
            let p = q * Vector3::new(f64::cos(t), f64::sin(t), 0.0);
            assert!(p.dot(&line.vec()).abs() < 1e-12);
        }
        assert!((q.determinant() - 1.0).abs() < 1e-12);
        let off = ProjLine::new([1.0, 0.0, 0.0]).unwrap();
        assert!(lift_rotation_q(v, &x, &off).is_err());
    }
}
