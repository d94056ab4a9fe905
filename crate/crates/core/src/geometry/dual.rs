use serde::Serialize;

use super::{ccw_angle, Color, Point, TriangulatedPatch, TOL};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Leg,
    Hypotenuse,
}

/// The unit rhombus `R(e)` of a dual edge, vertices `w, x, b, y` counterclockwise.
///
/// `alpha - beta` is the rhombus angle at `w`, in `(0, π]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhombusData {
    pub w: Point,
    pub x: Point,
    pub b: Point,
    pub y: Point,
    pub alpha: f64,
    pub beta: f64,
}

impl RhombusData {
    /// Half the rhombus angle at `w`.
    pub fn theta(&self) -> f64 {
        (self.alpha - self.beta) / 2.0
    }
}

#[derive(Clone, Debug)]
pub struct DualVertex {
    pub pos: Point,
    pub color: Color,
}

#[derive(Clone, Debug)]
pub struct DualEdge {
    pub w: usize,
    pub b: usize,
    /// Primal edge crossed by this dual edge.
    pub primal: usize,
    pub kind: EdgeKind,
    pub rhombus: RhombusData,
    pub nu: f64,
}

impl DualEdge {
    /// Unit vector from `w` towards `b`; for zero-length edges, the direction normal to the
    /// hypotenuse pointing into the black face.
    pub fn direction(&self) -> Point {
        let d = Point::i() * (self.rhombus.x - self.rhombus.y);
        d / d.norm()
    }
}

/// Bipartite dual of a triangulated patch, embedded at circumcenters.
///
/// Dual vertex `i` is face `i` of `tri`.
#[derive(Clone, Debug)]
pub struct IsoradialDual {
    pub tri: TriangulatedPatch,
    pub vertices: Vec<DualVertex>,
    pub edges: Vec<DualEdge>,
    adjacency: Vec<Vec<usize>>,
    of_primal: Vec<Option<usize>>,
}

pub fn dual_graph(tri: &TriangulatedPatch) -> IsoradialDual {
    let vertices: Vec<DualVertex> =
        tri.faces.iter().map(|f| DualVertex { pos: f.circumcenter, color: f.color }).collect();
    let mut edges = Vec::new();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    let mut of_primal = vec![None; tri.edges.len()];
    for (pi, pe) in tri.edges.iter().enumerate() {
        let (Some(l), Some(r)) = (pe.left, pe.right) else { continue };
        let (w, b, p, q) = if tri.faces[l].color == Color::White {
            (l, r, pe.ends.0, pe.ends.1)
        } else {
            (r, l, pe.ends.1, pe.ends.0)
        };
        let rhombus = rhombus_data(vertices[w].pos, vertices[b].pos, tri.vertices[p].pos, tri.vertices[q].pos);
        let kind = if (vertices[w].pos - vertices[b].pos).norm() < TOL { EdgeKind::Hypotenuse } else { EdgeKind::Leg };
        let nu = 2.0 * rhombus.theta().sin();
        let id = edges.len();
        edges.push(DualEdge { w, b, primal: pi, kind, rhombus, nu });
        adjacency[w].push(id);
        adjacency[b].push(id);
        of_primal[pi] = Some(id);
    }
    IsoradialDual { tri: tri.clone(), vertices, edges, adjacency, of_primal }
}

/// `p -> q` runs counterclockwise around the white face.
pub(crate) fn rhombus_data(w: Point, b: Point, p: Point, q: Point) -> RhombusData {
    let beta = (p - w).arg();
    let mut angle = ccw_angle(p - w, q - w);
    if (w - b).norm() < TOL || angle > std::f64::consts::PI {
        angle = std::f64::consts::PI;
    }
    RhombusData { w, x: p, b, y: q, alpha: beta + angle, beta }
}

/// `2 sin θ` for the rhombus of a dual edge, after checking its geometry.
pub fn critical_weight(edge: &DualEdge) -> Result<f64> {
    let r = &edge.rhombus;
    for (u, v) in [(r.x, r.w), (r.y, r.w), (r.x, r.b), (r.y, r.b)] {
        if ((u - v).norm() - 1.0).abs() > 1e-7 {
            return Err(Error::Geometry("rhombus R(e) does not have unit sides".into()));
        }
    }
    if (r.w + r.b - r.x - r.y).norm() > 1e-7 {
        return Err(Error::Geometry("rhombus R(e) is not a parallelogram".into()));
    }
    let t = r.theta();
    if !(t > 0.0 && t <= std::f64::consts::FRAC_PI_2 + TOL) {
        return Err(Error::Geometry(format!("rhombus angle {} out of range", 2.0 * t)));
    }
    Ok(2.0 * t.sin())
}

impl IsoradialDual {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn other(&self, e: usize, v: usize) -> usize {
        let d = &self.edges[e];
        if d.w == v {
            d.b
        } else {
            d.w
        }
    }

    pub fn whites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.vertices[v].color == Color::White).collect()
    }

    pub fn blacks(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.vertices[v].color == Color::Black).collect()
    }

    pub fn edge_between(&self, w: usize, b: usize) -> Option<usize> {
        self.adjacency[w].iter().copied().find(|&e| self.other(e, w) == b)
    }

    /// Dual edge crossing primal edge `p`, if any.
    pub fn edge_of_primal(&self, p: usize) -> Option<usize> {
        self.of_primal[p]
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.nu).collect()
    }
}
