//! Rhombus patches, their diagonal triangulations, isoradial duals and torus quotients.

mod dual;
mod patch;
mod torus;
mod triangulated;

pub use dual::{critical_weight, dual_graph, DualEdge, DualVertex, EdgeKind, IsoradialDual, RhombusData};
#[cfg(test)]
pub(crate) use patch::lattice_patch;
pub use patch::{build_patch, PatchVertex, RegionSpec, RhombusPatch};
pub use torus::{torus_quotient, TorusEdge, TorusFace, TorusGraph};
pub use triangulated::{add_diagonals, triangle_lattice_patch, Face, PrimalEdge, PrimalVertex, TriangulatedPatch, VertexKind};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Point = Complex64;

/// Tolerance for incidence and length checks.
pub const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

/// Counterclockwise angle from `u` to `v`, in `[0, 2π)`.
pub fn ccw_angle(u: Point, v: Point) -> f64 {
    let a = (u.re * v.im - u.im * v.re).atan2(u.re * v.re + u.im * v.im);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Quantized key of a point, used to compare geometric objects across patches.
pub fn point_key(p: Point) -> (i64, i64) {
    ((p.re * 1e6).round() as i64, (p.im * 1e6).round() as i64)
}

pub(crate) fn cross(u: Point, v: Point) -> f64 {
    u.re * v.im - u.im * v.re
}

/// Clockwise corner cycles around every vertex whose incident edges all have two faces.
///
/// Each cycle lists `(edge, face)` pairs: starting in `face`, cross `edge` to reach the next
/// face clockwise around the vertex. Works on surfaces where a face may meet a vertex twice.
pub(crate) fn cw_corner_cycles(
    face_edges: &[[usize; 3]],
    edge_faces: &[(Option<usize>, Option<usize>)],
) -> Vec<Vec<(usize, usize)>> {
    let nf = face_edges.len();
    let mut seen = vec![[false; 3]; nf];
    let mut cycles = Vec::new();
    for f0 in 0..nf {
        for k0 in 0..3 {
            if seen[f0][k0] {
                continue;
            }
            let mut cycle = Vec::new();
            let (mut f, mut k) = (f0, k0);
            let closed = loop {
                seen[f][k] = true;
                let e = face_edges[f][k];
                let g = match edge_faces[e] {
                    (Some(a), Some(b)) => {
                        if a == f {
                            b
                        } else {
                            a
                        }
                    }
                    _ => break false,
                };
                cycle.push((e, f));
                let j = face_edges[g].iter().position(|&x| x == e).expect("edge listed in both faces");
                f = g;
                k = (j + 1) % 3;
                if (f, k) == (f0, k0) {
                    break true;
                }
                if seen[f][k] {
                    break false;
                }
            };
            if closed {
                cycles.push(cycle);
            } else {
                // mark the rest of an open fan by walking the other way
                let (mut f, mut k) = (f0, k0);
                loop {
                    let e = face_edges[f][(k + 2) % 3];
                    let g = match edge_faces[e] {
                        (Some(a), Some(b)) => {
                            if a == f {
                                b
                            } else {
                                a
                            }
                        }
                        _ => break,
                    };
                    let j = face_edges[g].iter().position(|&x| x == e).unwrap();
                    f = g;
                    k = j;
                    if seen[f][k] {
                        break;
                    }
                    seen[f][k] = true;
                }
            }
        }
    }
    cycles
}
