//! Train-tracks of rhombus patches and the completion of a finite patch to the fundamental
//! domain of a periodic rhombus tiling.

mod convex;
mod periodic;

use std::collections::HashMap;

use crate::geometry::{cross, point_key, Color, PatchVertex, Point, RhombusPatch};
use crate::{Error, Result};

pub use convex::{complete_to_convex, make_track_convex, track_boundary_crossings, ConvexZonogon};
pub use periodic::{embed_in_periodic, periodic_embedding, reduced_basis, tiling_report, zonogon_tiling, TilingReport};

/// A maximal chain of rhombi, each crossed between two opposite edges parallel to `transversal`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrack {
    pub rhombi: Vec<usize>,
    /// Patch edges crossed, in walking order; one more than `rhombi`.
    pub edges: Vec<usize>,
    /// Unit direction of the crossed edges.
    pub transversal: Point,
    /// Whether `transversal` points to the left of the walking direction.
    pub oriented: bool,
}

impl TrainTrack {
    pub fn len(&self) -> usize {
        self.rhombi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhombi.is_empty()
    }

    pub fn parallel_to(&self, other: &TrainTrack) -> bool {
        cross(self.transversal, other.transversal).abs() < 1e-9
    }
}

pub(crate) fn edge_ids(patch: &RhombusPatch) -> HashMap<(usize, usize), usize> {
    patch.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect()
}

/// The two pairs of opposite edges of rhombus `r`.
fn edge_classes(patch: &RhombusPatch, ids: &HashMap<(usize, usize), usize>, r: usize) -> [[usize; 2]; 2] {
    let q = patch.rhombi[r];
    let e = |a: usize, b: usize| ids[&(q[a].min(q[b]), q[a].max(q[b]))];
    [[e(0, 1), e(3, 2)], [e(1, 2), e(0, 3)]]
}

pub(crate) fn edge_mid(patch: &RhombusPatch, e: usize) -> Point {
    let (a, b) = patch.edges()[e];
    (patch.pos(a) + patch.pos(b)) / 2.0
}

/// All train-tracks of `patch`; every rhombus lies on exactly two of them.
pub fn train_tracks(patch: &RhombusPatch) -> Vec<TrainTrack> {
    let ids = edge_ids(patch);
    let er = patch.edge_rhombi();
    let classes: Vec<_> = (0..patch.rhombi.len()).map(|r| edge_classes(patch, &ids, r)).collect();
    let mut seen = vec![[false; 2]; patch.rhombi.len()];
    // continue across edge `e` out of rhombus `r`: next rhombus, its class, exit edge
    let step = |r: usize, e: usize| -> Option<(usize, usize, usize)> {
        let s = *er[e].iter().find(|&&s| s != r)?;
        let c = if classes[s][0].contains(&e) { 0 } else { 1 };
        let exit = if classes[s][c][0] == e { classes[s][c][1] } else { classes[s][c][0] };
        Some((s, c, exit))
    };
    let mut tracks = Vec::new();
    for r0 in 0..patch.rhombi.len() {
        for c0 in 0..2 {
            if seen[r0][c0] {
                continue;
            }
            seen[r0][c0] = true;
            let [ea, eb] = classes[r0][c0];
            let walk = |mut r: usize, mut e: usize, seen: &mut Vec<[bool; 2]>| {
                let mut out = Vec::new();
                while let Some((s, c, exit)) = step(r, e) {
                    if seen[s][c] {
                        break;
                    }
                    seen[s][c] = true;
                    out.push((s, e, exit));
                    r = s;
                    e = exit;
                }
                out
            };
            let fwd = walk(r0, eb, &mut seen);
            let back = walk(r0, ea, &mut seen);
            let mut rhombi: Vec<usize> = back.iter().rev().map(|x| x.0).collect();
            let mut edges: Vec<usize> = back.iter().rev().map(|x| x.2).collect();
            rhombi.push(r0);
            edges.push(ea);
            edges.push(eb);
            rhombi.extend(fwd.iter().map(|x| x.0));
            edges.extend(fwd.iter().map(|x| x.2));
            let (a, b) = patch.edges()[ea];
            let mut u = patch.pos(b) - patch.pos(a);
            u /= u.norm();
            if u.im < -1e-12 || (u.im.abs() <= 1e-12 && u.re < 0.0) {
                u = -u;
            }
            let walking = edge_mid(patch, eb) - edge_mid(patch, ea);
            if cross(walking, u) < 0.0 {
                rhombi.reverse();
                edges.reverse();
            }
            tracks.push(TrainTrack { rhombi, edges, transversal: u, oriented: true });
        }
    }
    tracks
}

/// The two tracks through each rhombus.
pub(crate) fn tracks_of_rhombi(patch: &RhombusPatch, tracks: &[TrainTrack]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); patch.rhombi.len()];
    for (t, track) in tracks.iter().enumerate() {
        for &r in &track.rhombi {
            out[r].push(t);
        }
    }
    out
}

/// Exterior angle from `u` to `v`, in `(-π, π]`.
pub fn exterior_angle(u: Point, v: Point) -> f64 {
    cross(u, v).atan2(u.re * v.re + u.im * v.im)
}

/// Edge vectors of the outer boundary, counterclockwise, starting at the lowest then leftmost
/// boundary vertex.
pub fn boundary_vectors(patch: &RhombusPatch) -> Vec<Point> {
    canonical_boundary(patch).iter().map(|&(a, b)| patch.pos(b) - patch.pos(a)).collect()
}

pub(crate) fn canonical_boundary(patch: &RhombusPatch) -> Vec<(usize, usize)> {
    let mut b = patch.boundary();
    let low = |v: usize| {
        let k = point_key(patch.pos(v));
        (k.1, k.0)
    };
    if let Some(start) = (0..b.len()).min_by_key(|&i| low(b[i].0)) {
        b.rotate_left(start);
    }
    b
}

/// Sum of the exterior angles at the boundary vertices from edge `i` to edge `j`, going forward
/// cyclically.
pub fn turning_angle(boundary: &[Point], i: usize, j: usize) -> Result<f64> {
    let m = boundary.len();
    if i >= m || j >= m || i == j {
        return Err(Error::Geometry(format!("turning angle indices ({i}, {j}) invalid for {m} edges")));
    }
    let steps = (j + m - i) % m;
    Ok((0..steps).map(|s| exterior_angle(boundary[(i + s) % m], boundary[(i + s + 1) % m])).sum())
}

/// Turning angle once around the whole cycle.
pub fn total_turning(boundary: &[Point]) -> f64 {
    let m = boundary.len();
    (0..m).map(|s| exterior_angle(boundary[s], boundary[(s + 1) % m])).sum()
}

/// Adds rhombi given by their corner positions to `base`, keeping the vertex indices and colors
/// of `base` and matching corners to existing vertices by position.
pub(crate) fn extend_patch(base: &RhombusPatch, added: &[[Point; 4]]) -> Result<RhombusPatch> {
    let mut vertices = base.vertices.clone();
    let mut colors: Vec<Option<Color>> = vertices.iter().map(|v| Some(v.color)).collect();
    let mut index: HashMap<(i64, i64), usize> =
        vertices.iter().enumerate().map(|(i, v)| (point_key(v.pos), i)).collect();
    let mut next_id = vertices.iter().map(|v| v.id + 1).max().unwrap_or(0);
    let mut rhombi = base.rhombi.clone();
    for q in added {
        let r = q.map(|p| {
            *index.entry(point_key(p)).or_insert_with(|| {
                vertices.push(PatchVertex { id: next_id, pos: p, color: Color::White });
                colors.push(None);
                next_id += 1;
                vertices.len() - 1
            })
        });
        rhombi.push(r);
    }
    let fresh = &rhombi[base.rhombi.len()..];
    loop {
        let mut progress = false;
        let mut pending = None;
        for r in fresh {
            match (0..4).find(|&k| colors[r[k]].is_some()) {
                Some(k) => {
                    let c = colors[r[k]].unwrap();
                    for (d, &v) in r.iter().enumerate() {
                        if colors[v].is_none() {
                            colors[v] = Some(if (d + 4 - k) % 2 == 0 { c } else { c.flip() });
                            progress = true;
                        }
                    }
                }
                None => pending = Some(r[0]),
            }
        }
        match (progress, pending) {
            (_, None) => break,
            (false, Some(v)) => colors[v] = Some(Color::White),
            _ => {}
        }
    }
    for (v, c) in vertices.iter_mut().zip(&colors) {
        v.color = c.unwrap_or(Color::White);
    }
    RhombusPatch::new(vertices, rhombi)
}

/// Corner positions of rhombus `r`.
pub(crate) fn corners(patch: &RhombusPatch, r: usize) -> [Point; 4] {
    patch.rhombi[r].map(|v| patch.pos(v))
}

pub(crate) fn center_key(q: &[Point; 4]) -> (i64, i64) {
    point_key((q[0] + q[2]) / 2.0)
}

/// Area of the intersection of two counterclockwise convex polygons.
pub(crate) fn convex_overlap(a: &[Point], b: &[Point]) -> f64 {
    let mut poly: Vec<Point> = a.to_vec();
    for k in 0..b.len() {
        let (p, q) = (b[k], b[(k + 1) % b.len()]);
        let side = |x: Point| cross(q - p, x - p);
        let mut next = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let (x, y) = (poly[i], poly[(i + 1) % poly.len()]);
            let (sx, sy) = (side(x), side(y));
            if sx >= 0.0 {
                next.push(x);
            }
            if (sx >= 0.0) != (sy >= 0.0) {
                next.push(x + (y - x) * (sx / (sx - sy)));
            }
        }
        poly = next;
        if poly.len() < 3 {
            return 0.0;
        }
    }
    polygon_area(&poly)
}

pub(crate) fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Signed area of the intersection of a polygon with the disk of radius `r` about `c`.
pub(crate) fn disk_overlap(poly: &[Point], c: Point, r: f64) -> f64 {
    let n = poly.len();
    (0..n).map(|i| sector_triangle(poly[i] - c, poly[(i + 1) % n] - c, r)).sum()
}

/// Signed area of the triangle (0, a, b) intersected with the disk of radius `r` about 0.
fn sector_triangle(a: Point, b: Point, r: f64) -> f64 {
    let d = b - a;
    let (qa, qb, qc) = (d.norm_sqr(), 2.0 * (a.re * d.re + a.im * d.im), a.norm_sqr() - r * r);
    let mut ts = vec![0.0];
    let disc = qb * qb - 4.0 * qa * qc;
    if qa > 0.0 && disc > 0.0 {
        let s = disc.sqrt();
        for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.push(1.0);
    ts.windows(2)
        .map(|w| {
            let (p, q) = (a + d * w[0], a + d * w[1]);
            if (a + d * ((w[0] + w[1]) / 2.0)).norm() <= r {
                cross(p, q) / 2.0
            } else {
                r * r * cross(p, q).atan2(p.re * q.re + p.im * q.im) / 2.0
            }
        })
        .sum()
}
