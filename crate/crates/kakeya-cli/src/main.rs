//! `kakeya`: plan, sweep and measure needle constructions from the command line.
//!
//! Exit codes: 0 ok, 1 ran but the area budget was missed, 2 infeasible,
//! 3 bad input, 4 failed precondition.

use clap::{Args, Parser, Subcommand};
use kakeya::blind::{build_rotation_plan, build_translation_plan, MotionPlan, PlanMode, PlanOptions, ScheduleKind};
use kakeya::geom::{proj_embed, Bbox, ProjLine, Scene, Vec2};
use kakeya::limits::{
    besicovitch_rotation, besicovitch_translation, nikodym_assemble, shift_grid, BesicovitchRun, LimitOptions,
};
use kakeya::report::{csv, path_svg, to_json, write_pgm};
use kakeya::se2::{lemma52_gap, Rot};
use kakeya::sweep::{
    measure, sweep_grid, verify_lemma_31, verify_lemma_33, verify_small_neighborhood, AreaReport, SweepInput,
    SweepOptions,
};
use kakeya::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "kakeya", version, about = "Kakeya needle constructions on polyline scenes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Translate the scene to a target point with small swept area.
    Translate(Common),
    /// Move the scene by a rotation with centers near a line.
    Rotate(Common),
    /// Finite-depth Besicovitch approximant.
    Besicovitch(Common),
    /// Nikodym assembly over a shift grid.
    Nikodym(NikodymArgs),
    /// Ratio checks for the slab sweep bounds.
    VerifyLemmas(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scene JSON file (`{"polylines": [[[x, y], ...]], "closed": [bool]}`).
    #[arg(long, conflicts_with = "gen")]
    scene: Option<PathBuf>,
    /// Generated scene: `circle:r,n`, `segment:len` or `convex:a,b,c,span,n`.
    #[arg(long)]
    gen: Option<String>,
    /// Area budget (`eps0` for besicovitch and nikodym).
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Levels of a Besicovitch or Nikodym run.
    #[arg(long, default_value_t = 1)]
    depth: u32,
    /// Translation target `x,y`.
    #[arg(long)]
    target: Option<String>,
    /// Rotation target `zx,zy,phi`: rotate by `phi` about `(zx, zy)`.
    #[arg(long)]
    target_rot: Option<String>,
    /// Line through two points, `x1,y1..x2,y2`.
    #[arg(long)]
    line: Option<String>,
    #[arg(long, default_value_t = 1024)]
    grid_max: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scene frames drawn in `path.svg`.
    #[arg(long, default_value_t = 60)]
    frames: usize,
    #[command(flatten)]
    sched: SchedArgs,
}

#[derive(Args, Debug, Clone)]
struct SchedArgs {
    #[arg(long, default_value_t = 0.5)]
    beta0: f64,
    #[arg(long, default_value_t = 0.5)]
    beta_ratio: f64,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    eta_scale: f64,
    #[arg(long, default_value_t = kakeya::blind::DEPTH_CAP)]
    depth_cap: u32,
    /// Stop at the depth cap instead of failing.
    #[arg(long)]
    truncate: bool,
    /// Besicovitch level `n` uses depth cap `n·d` with truncation.
    #[arg(long)]
    depth_per_level: Option<u32>,
    /// Multiply every fineness by this factor.
    #[arg(long, default_value_t = 1)]
    fineness_mult: u64,
}

#[derive(Args, Debug, Clone)]
struct NikodymArgs {
    #[command(flatten)]
    common: Common,
    /// Shift grid is `k×k` over the square.
    #[arg(long, default_value_t = 5)]
    shifts: usize,
    /// Target square `x0,y0,x1,y1`.
    #[arg(long, default_value = "0,0,1,1")]
    square: String,
    /// Required coverage fraction.
    #[arg(long, default_value_t = 0.99)]
    coverage: f64,
}

/// Outcome of a subcommand that ran to completion.
enum Verdict {
    Pass,
    Miss,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Translate(c) => cmd_translate(c),
        Cmd::Rotate(c) => cmd_rotate(c),
        Cmd::Besicovitch(c) => cmd_besicovitch(c),
        Cmd::Nikodym(n) => cmd_nikodym(n),
        Cmd::VerifyLemmas(c) => cmd_verify(c),
    };
    match res {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Miss) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Infeasible(_) => 2,
                Error::InvalidInput(_) => 3,
                Error::Precondition(_) => 4,
            })
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn nums(s: &str, n: usize, what: &str) -> Result<Vec<f64>, Error> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad(format!("{what}: expected {n} numbers, got {s:?}")))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(bad(format!("{what}: expected {n} finite numbers, got {s:?}")));
    }
    Ok(v)
}

fn load_scene(c: &Common) -> Result<Scene, Error> {
    match (&c.scene, &c.gen) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).map_err(|e| bad(format!("{}: {e}", p.display())))?;
            Scene::from_json(&text)
        }
        (None, Some(g)) => {
            let (kind, args) = g.split_once(':').ok_or_else(|| bad(format!("bad --gen {g:?}")))?;
            match kind {
                "circle" => {
                    let v = nums(args, 2, "circle")?;
                    Scene::circle(v[0], v[1] as usize)
                }
                "segment" => Scene::segment(nums(args, 1, "segment")?[0]),
                "convex" => {
                    let v = nums(args, 5, "convex")?;
                    Scene::convex_graph([v[0], v[1], v[2]], v[3], v[4] as usize)
                }
                _ => Err(bad(format!("unknown generator {kind:?}"))),
            }
        }
        (None, None) => Err(bad("one of --scene or --gen is required")),
    }
}

fn positive(x: f64, what: &str) -> Result<f64, Error> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(bad(format!("{what} must be positive")))
    }
}

fn target_point(c: &Common) -> Result<Vec2, Error> {
    let t = c.target.as_deref().ok_or_else(|| bad("--target is required"))?;
    let v = nums(t, 2, "target")?;
    Ok(Vec2::new(v[0], v[1]))
}

fn target_rot(c: &Common) -> Result<Rot, Error> {
    let t = c.target_rot.as_deref().ok_or_else(|| bad("--target-rot is required"))?;
    let v = nums(t, 3, "target-rot")?;
    Rot::from_center(Vec2::new(v[0], v[1]), v[2])
}

fn parse_line(c: &Common) -> Result<ProjLine, Error> {
    let t = c.line.as_deref().ok_or_else(|| bad("--line is required"))?;
    let (a, b) = t.split_once("..").ok_or_else(|| bad(format!("--line: expected x1,y1..x2,y2, got {t:?}")))?;
    let (a, b) = (nums(a, 2, "line")?, nums(b, 2, "line")?);
    ProjLine::through(&proj_embed(Vec2::new(a[0], a[1])), &proj_embed(Vec2::new(b[0], b[1])))
        .map_err(|_| bad("--line needs two distinct points"))
}

fn plan_options(s: &SchedArgs) -> Result<PlanOptions, Error> {
    let mut o = PlanOptions::default();
    o.schedule.kind = ScheduleKind::Desk {
        beta0: positive(s.beta0, "beta0")?,
        beta_ratio: positive(s.beta_ratio, "beta-ratio")?,
        gamma_max: positive(s.gamma, "gamma")?,
    };
    o.schedule.eta_scale = positive(s.eta_scale, "eta-scale")?;
    o.schedule.depth_cap = s.depth_cap;
    o.schedule.truncate = s.truncate;
    o.fineness_multiplier = s.fineness_mult.max(1);
    Ok(o)
}

fn out_dir(c: &Common) -> Result<&Path, Error> {
    std::fs::create_dir_all(&c.out).map_err(|e| bad(format!("{}: {e}", c.out.display())))?;
    Ok(&c.out)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), Error> {
    std::fs::write(dir.join(name), body).map_err(|e| bad(format!("{name}: {e}")))
}

/// `sweep.pgm` and `path.svg`; the grid box comes from `full` so a sweep
/// with everything deleted still has one.
fn write_artifacts(dir: &Path, scene: &Scene, input: &SweepInput, full: &SweepInput, c: &Common) -> Result<(), Error> {
    let opts = SweepOptions { bbox: Some(full.bbox()), ..SweepOptions::with_grid(c.grid_max) };
    let grid = sweep_grid(input, &opts)?;
    let mut pgm = Vec::new();
    write_pgm(&grid, &mut pgm).map_err(|e| bad(format!("sweep.pgm: {e}")))?;
    std::fs::write(dir.join("sweep.pgm"), pgm).map_err(|e| bad(format!("sweep.pgm: {e}")))?;
    write(dir, "path.svg", &path_svg(scene, input, c.frames))
}

fn area_row(label: &str, eps: f64, a: &AreaReport) -> Vec<String> {
    vec![label.into(), format!("{eps}"), format!("{}", a.estimate), format!("{}", a.uncertainty), format!("{}", a.h)]
}

const AREA_HEADER: [&str; 5] = ["run", "eps", "area", "uncertainty", "h"];

#[derive(Serialize)]
struct NeedleReport<'a> {
    command: &'a str,
    seed: u64,
    eps: f64,
    steps: u64,
    leaves: usize,
    endpoint_error: f64,
    certified_budget: f64,
    area: AreaReport,
    pass: bool,
    artifacts: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_center_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    drift_violations: Option<usize>,
}

fn finish_needle(cmd: &str, scene: &Scene, plan: &MotionPlan, c: &Common, endpoint_error: f64) -> Result<Verdict, Error> {
    let dir = out_dir(c)?;
    let input = SweepInput::plan(scene, plan, true);
    let area = measure(&input, &SweepOptions::with_grid(c.grid_max))?;
    let pass = area.estimate <= c.eps + area.uncertainty;
    let mut artifacts = vec!["plan.json", "report.json", "area.csv", "sweep.pgm", "path.svg"];
    let (mut max_center, mut drift) = (None, None);
    if matches!(plan.mode, PlanMode::Rotation { .. }) {
        let rows: Vec<Vec<String>> = plan
            .centers
            .iter()
            .map(|r| {
                vec![
                    r.node.to_string(),
                    format!("{}", r.shift),
                    format!("{}", 2.0 * r.alpha),
                    format!("{}", r.line_distance),
                ]
            })
            .collect();
        write(dir, "centers.csv", &csv(&["node", "shift", "two_alpha", "line_distance"], &rows))?;
        artifacts.push("centers.csv");
        max_center = Some(plan.centers.iter().map(|r| r.line_distance).fold(0.0, f64::max));
        drift = Some(plan.centers.iter().filter(|r| r.shift > 2.0 * r.alpha + 1e-9).count());
    }
    write(dir, "plan.json", &to_json(plan)?)?;
    write(dir, "area.csv", &csv(&AREA_HEADER, &[area_row(cmd, c.eps, &area)]))?;
    write_artifacts(dir, scene, &input, &SweepInput::plan(scene, plan, false), c)?;
    let rep = NeedleReport {
        command: cmd,
        seed: c.seed,
        eps: c.eps,
        steps: plan.step_count(),
        leaves: plan.leaves.len(),
        endpoint_error,
        certified_budget: plan.certified_budget,
        area,
        pass,
        artifacts,
        max_center_distance: max_center,
        drift_violations: drift,
    };
    write(dir, "report.json", &to_json(&rep)?)?;
    println!("{cmd}: area {:.6} ± {:.6} (eps {}) {}", area.estimate, area.uncertainty, c.eps, if pass { "ok" } else { "over budget" });
    Ok(if pass { Verdict::Pass } else { Verdict::Miss })
}

fn cmd_translate(c: &Common) -> Result<Verdict, Error> {
    let scene = load_scene(c)?;
    let eps = positive(c.eps, "eps")?;
    let target = target_point(c)?;
    let plan = build_translation_plan(&scene, target, eps, &plan_options(&c.sched)?)?;
    let err = (plan.translation_endpoint() - target).norm();
    finish_needle("translate", &scene, &plan, c, err)
}

fn cmd_rotate(c: &Common) -> Result<Verdict, Error> {
    let scene = load_scene(c)?;
    let eps = positive(c.eps, "eps")?;
    let x = target_rot(c)?;
    let line = parse_line(c)?;
    let plan = build_rotation_plan(&scene, &x, &line, eps, &plan_options(&c.sched)?)?;
    let err = plan.endpoint().distance(&x.map(), scene.bounding_radius().max(1.0));
    finish_needle("rotate", &scene, &plan, c, err)
}

fn run_besicovitch(c: &Common, scene: &Scene) -> Result<BesicovitchRun, Error> {
    let eps0 = positive(c.eps, "eps")?;
    let opts = LimitOptions {
        plan: plan_options(&c.sched)?,
        grid_max: c.grid_max,
        depth_per_level: c.sched.depth_per_level,
        ..Default::default()
    };
    if c.target_rot.is_some() {
        besicovitch_rotation(scene, &target_rot(c)?, &parse_line(c)?, eps0, c.depth, &[], &opts)
    } else {
        besicovitch_translation(scene, &[Vec2::ZERO, target_point(c)?], eps0, c.depth, &opts)
    }
}

fn level_rows(run: &BesicovitchRun) -> Vec<Vec<String>> {
    run.levels
        .iter()
        .filter_map(|l| l.area.map(|a| area_row(&format!("level{}", l.n), l.eps, &a)))
        .collect()
}

fn cmd_besicovitch(c: &Common) -> Result<Verdict, Error> {
    let scene = load_scene(c)?;
    let run = run_besicovitch(c, &scene)?;
    let dir = out_dir(c)?;
    write(dir, "area.csv", &csv(&AREA_HEADER, &level_rows(&run)))?;
    write(dir, "report.json", &to_json(&run)?)?;
    let last = run.levels.len() - 1;
    write(dir, "plan.json", &to_json(&run.levels[last].plans)?)?;
    write_artifacts(dir, &scene, &run.level_input(last, &scene, true), &run.level_input(last, &scene, false), c)?;
    let pass = run.certified();
    for l in &run.levels {
        if let Some(a) = l.area {
            println!("level {}: eps {} area {:.6} ± {:.6}", l.n, l.eps, a.estimate, a.uncertainty);
        }
    }
    Ok(if pass { Verdict::Pass } else { Verdict::Miss })
}

fn cmd_nikodym(n: &NikodymArgs) -> Result<Verdict, Error> {
    let c = &n.common;
    let scene = load_scene(c)?;
    let sq = nums(&n.square, 4, "square")?;
    let square = Bbox { min: Vec2::new(sq[0], sq[1]), max: Vec2::new(sq[2], sq[3]) };
    let run = run_besicovitch(c, &scene)?;
    let shifts = shift_grid(n.shifts, &square);
    let cover = nikodym_assemble(&scene, &scene, &run, &shifts, square, c.grid_max)?;
    let dir = out_dir(c)?;
    write(dir, "area.csv", &csv(&AREA_HEADER, &[area_row("nikodym", cover.level_budget, &cover.area)]))?;
    #[derive(Serialize)]
    struct R<'a> {
        run: &'a BesicovitchRun,
        cover: &'a kakeya::limits::NikodymCover,
        threshold: f64,
    }
    write(dir, "report.json", &to_json(&R { run: &run, cover: &cover, threshold: n.coverage })?)?;
    let last = run.levels.len() - 1;
    write(dir, "plan.json", &to_json(&run.levels[last].plans)?)?;
    write_artifacts(dir, &scene, &run.level_input(last, &scene, true), &run.level_input(last, &scene, false), c)?;
    println!("nikodym: coverage {:.4}, area {:.4} (budget {:.4})", cover.coverage, cover.area.estimate, cover.budget);
    Ok(if cover.covers(n.coverage) && cover.certified() { Verdict::Pass } else { Verdict::Miss })
}

#[derive(Serialize)]
struct LemmaRow {
    check: String,
    value: f64,
    bound: String,
    pass: bool,
}

fn cmd_verify(c: &Common) -> Result<Verdict, Error> {
    let scene = match (&c.scene, &c.gen) {
        (None, None) => Scene::circle(1.0, 720)?,
        _ => load_scene(c)?,
    };
    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let z1 = Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let z2 = Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let (p1, p2) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        if let (Ok(a), Ok(b)) = (Rot::from_center(z1, p1), Rot::from_center(z2, p2)) {
            let (lhs, rhs) = lemma52_gap(&a, &b);
            if rhs > 1e-12 {
                worst = worst.max(lhs / rhs);
            }
        }
    }
    rows.push(LemmaRow { check: "center gap ratio".into(), value: worst, bound: "<= 1.5".into(), pass: worst <= 1.5 });
    let deltas = [0.2, 0.1, 0.05];
    let r31: Vec<f64> = deltas
        .iter()
        .map(|d| verify_lemma_31(&scene, kakeya::geom::Direction::new(0.0), *d, Vec2::new(1.0, 0.0), c.grid_max).map(|r| r.area.estimate))
        .collect::<Result<_, _>>()?;
    for w in r31.windows(2) {
        let q = w[1] / w[0];
        rows.push(LemmaRow { check: "tangent slab halving".into(), value: q, bound: "[0.35, 0.65]".into(), pass: (0.35..=0.65).contains(&q) });
    }
    let rot = Rot::from_center(Vec2::new(3.0, 0.0), std::f64::consts::FRAC_PI_2)?;
    let a = verify_lemma_33(&scene, &rot, 0.1, c.grid_max)?;
    let b = verify_lemma_33(&scene, &rot, 0.05, c.grid_max)?;
    let q = b.area.estimate / a.area.estimate;
    rows.push(LemmaRow { check: "normal ball halving".into(), value: q, bound: "[0.3, 0.7]".into(), pass: (0.3..=0.7).contains(&q) });
    for r in [&a, &b] {
        let quad = r.quadrature.unwrap_or(0.0);
        rows.push(LemmaRow {
            check: format!("quadrature bound at delta {}", r.delta),
            value: r.area.estimate - r.area.uncertainty,
            bound: format!("<= {quad}"),
            pass: r.area.estimate - r.area.uncertainty <= quad,
        });
    }
    let m = kakeya::se2::MotionSegment { start: kakeya::se2::Isometry::IDENTITY, gen: Rot::translation(Vec2::new(0.0, 1.0)) };
    let nb = verify_small_neighborhood(&SweepInput::motions(scene.segments(), &[m]), 0.02, &SweepOptions::with_grid(c.grid_max))?;
    rows.push(LemmaRow {
        check: "small neighborhood".into(),
        value: nb.inflated,
        bound: format!("<= {}", nb.predicted + std::f64::consts::PI * nb.eta * nb.eta),
        pass: nb.inflated <= nb.predicted + std::f64::consts::PI * nb.eta * nb.eta,
    });
    let dir = out_dir(c)?;
    let table: Vec<Vec<String>> =
        rows.iter().map(|r| vec![r.check.clone(), format!("{}", r.value), r.bound.replace(',', ";"), r.pass.to_string()]).collect();
    write(dir, "lemmas.csv", &csv(&["check", "value", "bound", "pass"], &table))?;
    write(dir, "report.json", &to_json(&rows)?)?;
    for r in &rows {
        println!("{:<32} {:>12.6}  {:<16} {}", r.check, r.value, r.bound, if r.pass { "PASS" } else { "FAIL" });
    }
    Ok(if rows.iter().all(|r| r.pass) { Verdict::Pass } else { Verdict::Miss })
}
