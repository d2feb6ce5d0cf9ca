//! Artifact writers: PGM grids, SVG path frames, CSV tables and JSON.

use crate::geom::{Bbox, Scene, Segment, Vec2};
use crate::se2::Isometry;
use crate::sweep::{RasterGrid, SweepInput};
use crate::Error;
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;

/// Binary PGM (`P5`), occupied cells black.
pub fn write_pgm(grid: &RasterGrid, mut out: impl Write) -> std::io::Result<()> {
    let s = grid.spec();
    write!(out, "P5\n{} {}\n255\n", s.nx, s.ny)?;
    for row in grid.rows_top_down() {
        let bytes: Vec<u8> = row.iter().map(|&b| if b { 0 } else { 255 }).collect();
        out.write_all(&bytes)?;
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::InvalidInput(format!("json: {e}")))
}

/// CSV with a header row. Fields are written with `{}`; none may contain commas.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Positions of the moving frame at every item boundary.
pub fn frame_path(input: &SweepInput) -> Vec<Isometry> {
    let mut out = Vec::with_capacity(input.items.len() + 1);
    for it in &input.items {
        if out.is_empty() {
            out.push(it.start);
        }
        out.push(it.start.compose(&it.gen.scale(it.mult as f64).map()));
    }
    out
}

/// SVG of the swept scene: `frames` copies of the full scene in grey with the
/// kept part on top in black, and the path of the origin in red.
pub fn path_svg(scene: &Scene, input: &SweepInput, frames: usize) -> String {
    let path = frame_path(input);
    let mut bbox = Bbox::empty();
    for g in &path {
        for s in scene.segments() {
            bbox.include(g.apply(s.a));
            bbox.include(g.apply(s.b));
        }
    }
    if !bbox.is_valid() {
        bbox = scene.bbox();
    }
    let bbox = bbox.pad(0.05 * bbox.width().max(bbox.height()).max(1e-9));
    let (w, h) = (bbox.width(), bbox.height());
    let size = 800.0;
    let k = size / w.max(h);
    let tx = |p: Vec2| ((p.x - bbox.min.x) * k, (bbox.max.y - p.y) * k);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        w * k,
        h * k,
        w * k,
        h * k
    );
    let poly = |out: &mut String, segs: &[Segment], g: &Isometry, style: &str| {
        let mut d = String::new();
        for s in segs {
            let (a, b) = (tx(g.apply(s.a)), tx(g.apply(s.b)));
            let _ = write!(d, "M{:.2} {:.2}L{:.2} {:.2}", a.0, a.1, b.0, b.1);
        }
        if !d.is_empty() {
            let _ = writeln!(out, r#"<path d="{d}" {style}/>"#);
        }
    };
    let n = input.items.len();
    if n > 0 {
        for f in 0..frames.max(1) {
            let i = if frames <= 1 { 0 } else { f * (n - 1) / (frames - 1) };
            let it = &input.items[i];
            poly(&mut out, scene.segments(), &it.start, r##"fill="none" stroke="#bbb" stroke-width="1""##);
            poly(&mut out, &input.sets[it.set], &it.start, r##"fill="none" stroke="#000" stroke-width="1""##);
        }
    }
    let stride = (path.len() / 5000).max(1);
    let mut d = String::new();
    for (i, g) in path.iter().enumerate().filter(|(i, _)| i % stride == 0 || *i + 1 == path.len()) {
        let p = tx(g.v);
        let _ = write!(d, "{}{:.2} {:.2}", if i == 0 { "M" } else { "L" }, p.0, p.1);
    }
    if !d.is_empty() {
        let _ = writeln!(out, r##"<path d="{d}" fill="none" stroke="#c00" stroke-width="1.5"/>"##);
    }
    out.push_str("</svg>\n");
    out
}
