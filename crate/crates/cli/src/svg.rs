use std::fmt::Write;

use anyhow::{bail, Result};

use isodimer::geometry::{point_key, EdgeKind, IsoradialDual, Point, RhombusPatch};
use isodimer::tilings::{height1, matching_to_tiling, DimerConfig};
use isodimer::traintracks::train_tracks;

const SCALE: f64 = 40.0;
const MARGIN: f64 = 20.0;
const TRACK_COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Default)]
pub struct RenderOptions {
    pub matching: Option<(IsoradialDual, DimerConfig)>,
    pub heights: bool,
    pub tracks: bool,
    /// Periods and the number of copies along each.
    pub lattice: Option<([Point; 2], (usize, usize))>,
}

fn shifts(opts: &RenderOptions) -> Vec<Point> {
    match opts.lattice {
        None => vec![Point::new(0.0, 0.0)],
        Some(([a, b], (cols, rows))) => {
            let mut out = Vec::new();
            for j in 0..rows {
                for i in 0..cols {
                    let (di, dj) = (i as f64 - (cols / 2) as f64, j as f64 - (rows / 2) as f64);
                    out.push(a * di + b * dj);
                }
            }
            out
        }
    }
}

fn points_attr(ps: &[Point], map: &impl Fn(Point) -> (f64, f64)) -> String {
    ps.iter()
        .map(|&p| {
            let (x, y) = map(p);
            format!("{x:.3},{y:.3}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Corners of the quadrilateral formed by a tile's two triangles, counterclockwise.
fn tile_outline(triangles: &[[Point; 3]; 2]) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::new();
    for p in triangles.iter().flatten() {
        if !pts.iter().any(|q| point_key(*q) == point_key(*p)) {
            pts.push(*p);
        }
    }
    let c = pts.iter().sum::<Point>() / pts.len() as f64;
    pts.sort_by(|a, b| (a - c).arg().total_cmp(&(b - c).arg()));
    pts
}

/// SVG 1.1 drawing with the y axis pointing up and 40 pixels per unit length.
pub fn render(patch: &RhombusPatch, opts: &RenderOptions) -> Result<String> {
    if opts.heights && !patch.simply_connected() {
        bail!("--heights needs a simply connected patch (h1 is not single-valued around holes)");
    }
    let shifts = shifts(opts);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for s in &shifts {
        for v in &patch.vertices {
            let p = v.pos + s;
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
    }
    if patch.vertices.is_empty() {
        (x0, x1, y0, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    let width = (x1 - x0) * SCALE + 2.0 * MARGIN;
    let height = (y1 - y0) * SCALE + 2.0 * MARGIN;
    let map = |p: Point| ((p.re - x0) * SCALE + MARGIN, (y1 - p.im) * SCALE + MARGIN);
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.3}" height="{height:.3}" viewBox="0 0 {width:.3} {height:.3}">"#
    )?;
    let tiles = opts.matching.as_ref().map(|(d, m)| matching_to_tiling(d, m)).unwrap_or_default();
    for (k, s) in shifts.iter().enumerate() {
        let class = if opts.lattice.is_some() { "copy" } else { "patch" };
        writeln!(out, r#"<g class="{class}" id="{class}-{k}">"#)?;
        let shifted = |p: Point| map(p + s);
        for t in &tiles {
            let (class, fill) = match t.kind {
                EdgeKind::Hypotenuse => ("tile hypotenuse", "#9ecae1"),
                EdgeKind::Leg => ("tile leg", "#fdd49e"),
            };
            writeln!(
                out,
                r##"<polygon class="{class}" points="{}" fill="{fill}" stroke="#555" stroke-width="0.5"/>"##,
                points_attr(&tile_outline(&t.triangles), &shifted)
            )?;
        }
        for r in &patch.rhombi {
            let ps: Vec<Point> = r.iter().map(|&v| patch.pos(v)).collect();
            writeln!(
                out,
                r##"<polygon class="rhombus" points="{}" fill="none" stroke="#222" stroke-width="1.5"/>"##,
                points_attr(&ps, &shifted)
            )?;
        }
        writeln!(out, "</g>")?;
    }
    if opts.tracks {
        for (i, t) in train_tracks(patch).iter().enumerate() {
            let ps: Vec<Point> = t
                .edges
                .iter()
                .map(|&e| {
                    let (a, b) = patch.edges()[e];
                    (patch.pos(a) + patch.pos(b)) / 2.0
                })
                .collect();
            writeln!(
                out,
                r#"<polyline class="track" points="{}" fill="none" stroke="{}" stroke-opacity="0.35" stroke-width="12" stroke-linecap="round"/>"#,
                points_attr(&ps, &map),
                TRACK_COLORS[i % TRACK_COLORS.len()]
            )?;
        }
    }
    if opts.heights {
        let (dual, m) = opts.matching.as_ref().expect("heights come with a matching");
        let h = height1(dual, m, 0)?;
        for (v, value) in h.values.iter().enumerate() {
            let (x, y) = map(dual.tri.vertices[v].pos);
            writeln!(
                out,
                r#"<text class="height" x="{x:.3}" y="{y:.3}" font-size="10" text-anchor="middle">{value}</text>"#
            )?;
        }
    }
    writeln!(out, "</svg>")?;
    Ok(out)
}
