//! Values checked against closed forms computed here, not by the library.

use kakeya::blind::{choose_k, venetian_blind, Sign};
use kakeya::geom::{proj_distance, proj_embed, Bbox, Direction, Scene, Segment, Vec2};
use kakeya::se2::{star, MotionSegment, Rot};
use kakeya::sweep::{measure, verify_lemma_31, SweepInput, SweepOptions};
use std::f64::consts::{FRAC_PI_2, PI};

/// Row-major 3×3 homogeneous matrix of `u ↦ R(φ)u + t`.
fn hmat(phi: f64, t: [f64; 2]) -> [[f64; 3]; 3] {
    let (s, c) = phi.sin_cos();
    [[c, -s, t[0]], [s, c, t[1]], [0.0, 0.0, 1.0]]
}

fn mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

/// Matrix of the rotation by `phi` about `z`: `T(z)·R(φ)·T(−z)`.
fn rot_about(z: [f64; 2], phi: f64) -> [[f64; 3]; 3] {
    mul(&mul(&hmat(0.0, z), &hmat(phi, [0.0, 0.0])), &hmat(0.0, [-z[0], -z[1]]))
}

fn apply(m: &[[f64; 3]; 3], p: Vec2) -> Vec2 {
    Vec2::new(m[0][0] * p.x + m[0][1] * p.y + m[0][2], m[1][0] * p.x + m[1][1] * p.y + m[1][2])
}

const PROBES: [Vec2; 3] = [Vec2 { x: 0.3, y: -1.1 }, Vec2 { x: 2.0, y: 0.7 }, Vec2 { x: -1.4, y: 0.2 }];

#[test]
fn rotation_about_center_matches_matrix() {
    for (z, phi) in [([1.0, 2.0], 0.7), ([-3.0, 0.5], -1.9), ([0.0, 0.0], PI)] {
        let g = Rot::from_center(Vec2::new(z[0], z[1]), phi).unwrap().map();
        let m = rot_about(z, phi);
        for p in PROBES {
            assert!((g.apply(p) - apply(&m, p)).norm() < 1e-12);
        }
    }
}

#[test]
fn star_matches_matrix_product() {
    let a = ([1.0, -0.5], 0.4);
    let b = ([-2.0, 3.0], -1.1);
    let x1 = Rot::from_center(Vec2::new(a.0[0], a.0[1]), a.1).unwrap();
    let x2 = Rot::from_center(Vec2::new(b.0[0], b.0[1]), b.1).unwrap();
    let m = mul(&rot_about(a.0, a.1), &rot_about(b.0, b.1));
    let g = star(&x1, &x2).map();
    for p in PROBES {
        assert!((g.apply(p) - apply(&m, p)).norm() < 1e-12);
    }
}

/// `|G_s| = |G_{s−1}|·sin(β + (s−1)γ)/sin(β + sγ)` and
/// `|a_s| = |G_{s−1}|·sin γ / sin(β + sγ)`, from the law of sines.
fn blind_lengths(len: f64, beta: f64, gamma: f64, k: u32) -> (Vec<f64>, Vec<f64>) {
    let mut good = vec![len];
    let mut bad = vec![];
    for s in 1..=k {
        let g = *good.last().unwrap();
        let d = (beta + s as f64 * gamma).sin();
        bad.push(g * gamma.sin() / d);
        good.push(g * (beta + (s - 1) as f64 * gamma).sin() / d);
    }
    (good, bad)
}

#[test]
fn choose_k_reference_values() {
    assert_eq!(choose_k(PI / 20.0, PI / 20.0).unwrap(), 7);
    assert_eq!(choose_k(PI / 8.0, PI / 100.0).unwrap(), 24);
    // left end of the window is closed
    let (b, g) = (PI / 8.0, PI / 16.0);
    let k = choose_k(b, g).unwrap() as f64;
    assert!(k * g >= FRAC_PI_2 - 2.0 * b - g - 1e-12 && k * g < FRAC_PI_2 - 2.0 * b);
}

#[test]
fn blind_lengths_match_law_of_sines() {
    for (beta, gamma) in [(PI / 20.0, PI / 20.0), (PI / 8.0, PI / 100.0)] {
        for sign in [Sign::Plus, Sign::Minus] {
            let v = Vec2::new(0.8, 0.6) * 2.5;
            let vb = venetian_blind(v, beta, gamma, sign).unwrap();
            let (good, bad) = blind_lengths(v.norm(), beta, gamma, vb.k);
            for (g, o) in vb.good.iter().zip(&good) {
                assert!((g.norm() - o).abs() < 1e-9, "{} vs {o}", g.norm());
            }
            for (b, o) in vb.bad.iter().zip(&bad) {
                assert!((b.norm() - o).abs() < 1e-9);
            }
            // telescoped: |G_k| = |v| sin β / sin(β + kγ)
            let gk = v.norm() * beta.sin() / (beta + vb.k as f64 * gamma).sin();
            assert!((vb.good_length() - gk).abs() < 1e-9);
            assert!(vb.good_length() < v.norm() && vb.bad_length() < v.norm());
        }
    }
}

#[test]
fn blind_directions() {
    let (beta, gamma) = (0.3, 0.1);
    let v = Vec2::new(1.0, 0.0);
    let vb = venetian_blind(v, beta, gamma, Sign::Plus).unwrap();
    for b in &vb.bad {
        assert!((b.angle() - (-beta)).abs() < 1e-12);
    }
    assert!((vb.good_final().angle() - vb.k as f64 * gamma).abs() < 1e-12);
}

#[test]
fn projective_distance_of_embedded_points() {
    // angle between (0,0,1) and (1,0,1)/√2
    let d = proj_distance(&proj_embed(Vec2::ZERO), &proj_embed(Vec2::new(1.0, 0.0)));
    assert!((d - PI / 4.0).abs() < 1e-12);
}

fn grid(n: usize) -> SweepOptions {
    SweepOptions::with_grid(n)
}

#[test]
fn translated_segment_is_a_parallelogram() {
    let s = Segment::new(Vec2::ZERO, Vec2::new(1.0, 0.0));
    let v = Vec2::new(0.4, 0.8);
    let m = MotionSegment { start: kakeya::se2::Isometry::IDENTITY, gen: Rot::translation(v) };
    let r = measure(&SweepInput::motions(&[s], &[m]), &grid(512)).unwrap();
    let exact = 0.8;
    let tol = r.uncertainty + 2.0 * r.h * 2.0 * (1.0 + v.norm());
    assert!((r.estimate - exact).abs() <= tol, "{r:?}");
}

#[test]
fn rotated_segment_is_a_sector() {
    let s = Segment::new(Vec2::ZERO, Vec2::new(1.0, 0.0));
    let phi = 1.0;
    let m = MotionSegment { start: kakeya::se2::Isometry::IDENTITY, gen: Rot::from_center(Vec2::ZERO, phi).unwrap() };
    let r = measure(&SweepInput::motions(&[s], &[m]), &grid(512)).unwrap();
    let exact = phi / 2.0;
    let tol = r.uncertainty + 2.0 * r.h * (2.0 + phi);
    assert!((r.estimate - exact).abs() <= tol, "{r:?}");
}

#[test]
fn tangent_slab_of_circle_sweeps_two_thin_bands() {
    // circle radius 1, slab |θ_x − 0| < δ: two arcs of half-angle δ at the
    // top and bottom; moving them by v = (1, 0) sweeps about 2·|v|·2 sin δ
    let c = Scene::circle(1.0, 720).unwrap();
    for delta in [0.2, 0.1] {
        let r = verify_lemma_31(&c, Direction::new(0.0), delta, Vec2::new(1.0, 0.0), 1024).unwrap();
        let band = 2.0 * 2.0 * delta.sin();
        assert!(r.area.estimate <= band + r.area.uncertainty, "{delta}: {:?}", r.area);
        assert!(r.area.estimate > 0.0);
    }
}

#[test]
fn unit_square_by_sweeping() {
    let s = Segment::new(Vec2::ZERO, Vec2::new(1.0, 0.0));
    let m = MotionSegment { start: kakeya::se2::Isometry::IDENTITY, gen: Rot::translation(Vec2::new(0.0, 1.0)) };
    let opts = SweepOptions { bbox: Some(Bbox { min: Vec2::ZERO, max: Vec2::new(1.0, 1.0) }), ..grid(256) };
    let r = measure(&SweepInput::motions(&[s], &[m]), &opts).unwrap();
    assert!((r.estimate - 1.0).abs() <= 2.0 * r.h * 4.0);
}
