use std::collections::HashMap;

use super::{ccw_angle, cross, Color, Point, RhombusPatch, TOL};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Corner,
    Center,
}

#[derive(Clone, Debug)]
pub struct PrimalVertex {
    pub pos: Point,
    /// Rhombus-tiling coloring; `None` on plain triangle lattices.
    pub color: Option<Color>,
    pub kind: VertexKind,
}

#[derive(Clone, Debug)]
pub struct Face {
    /// Counterclockwise. On rhombus faces `verts[0] -> verts[1]` is the hypotenuse
    /// and `verts[2]` the rhombus center.
    pub verts: [usize; 3],
    pub color: Color,
    pub rhombus: Option<usize>,
    pub circumcenter: Point,
}

#[derive(Clone, Debug)]
pub struct PrimalEdge {
    pub ends: (usize, usize),
    /// Face having `ends.0 -> ends.1` in its counterclockwise boundary.
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub hypotenuse: bool,
}

/// A planar complex of triangles inscribed in unit circles, with a bipartite face coloring.
#[derive(Clone, Debug)]
pub struct TriangulatedPatch {
    pub base: Option<RhombusPatch>,
    pub vertices: Vec<PrimalVertex>,
    pub faces: Vec<Face>,
    pub edges: Vec<PrimalEdge>,
    face_edges: Vec<[usize; 3]>,
    vertex_faces: Vec<Vec<usize>>,
    interior: Vec<bool>,
}

pub fn add_diagonals(patch: &RhombusPatch) -> Result<TriangulatedPatch> {
    for &(a, b) in patch.edges() {
        if patch.vertices[a].color == patch.vertices[b].color {
            return Err(Error::NotBipartite(patch.vertices[a].id, patch.vertices[b].id));
        }
    }
    let n = patch.vertices.len();
    let mut vertices: Vec<PrimalVertex> = patch
        .vertices
        .iter()
        .map(|v| PrimalVertex { pos: v.pos, color: Some(v.color), kind: VertexKind::Corner })
        .collect();
    let mut faces = Vec::with_capacity(4 * patch.rhombi.len());
    for (ri, r) in patch.rhombi.iter().enumerate() {
        let c = n + ri;
        let center = (patch.pos(r[0]) + patch.pos(r[2])) / 2.0;
        vertices.push(PrimalVertex { pos: center, color: Some(Color::Black), kind: VertexKind::Center });
        for k in 0..4 {
            let (p, q) = (r[k], r[(k + 1) % 4]);
            let color = if patch.vertices[p].color == Color::White { Color::Black } else { Color::White };
            faces.push((vec![p, q, c], color, Some(ri)));
        }
    }
    TriangulatedPatch::from_faces(Some(patch.clone()), vertices, faces)
}

/// Parallelogram region of the triangular lattice with side `sqrt(3)` (circumradius 1):
/// `m x n` cells, each split into an up triangle (black) and a down triangle (white).
pub fn triangle_lattice_patch(m: usize, n: usize) -> Result<TriangulatedPatch> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidRegion("lattice dimensions must be positive".into()));
    }
    let s3 = 3f64.sqrt();
    let a = Point::new(s3, 0.0);
    let b = Point::new(s3 / 2.0, 1.5);
    let id = |i: usize, j: usize| j * (m + 1) + i;
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=m {
            vertices.push(PrimalVertex { pos: a * i as f64 + b * j as f64, color: None, kind: VertexKind::Corner });
        }
    }
    let mut faces = Vec::new();
    for j in 0..n {
        for i in 0..m {
            faces.push((vec![id(i, j), id(i + 1, j), id(i, j + 1)], Color::Black, None));
            faces.push((vec![id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)], Color::White, None));
        }
    }
    TriangulatedPatch::from_faces(None, vertices, faces)
}

impl TriangulatedPatch {
    /// Builds the complex from explicit triangles and validates isoradiality and the coloring.
    pub fn from_faces(
        base: Option<RhombusPatch>,
        vertices: Vec<PrimalVertex>,
        raw: Vec<(Vec<usize>, Color, Option<usize>)>,
    ) -> Result<Self> {
        let mut faces = Vec::with_capacity(raw.len());
        for (fi, (vs, color, rhombus)) in raw.into_iter().enumerate() {
            if vs.len() != 3 || vs.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::MalformedPatch(format!("face {fi} is not a triangle")));
            }
            let verts = [vs[0], vs[1], vs[2]];
            let p = verts.map(|v| vertices[v].pos);
            if cross(p[1] - p[0], p[2] - p[0]) <= TOL {
                return Err(Error::MalformedPatch(format!("face {fi} is not counterclockwise")));
            }
            let circumcenter = circumcenter(p[0], p[1], p[2]);
            for q in p {
                if ((q - circumcenter).norm() - 1.0).abs() > TOL {
                    return Err(Error::Geometry(format!("face {fi} does not have circumradius 1")));
                }
            }
            faces.push(Face { verts, color, rhombus, circumcenter });
        }
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<PrimalEdge> = Vec::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let mut fe = [0; 3];
            for k in 0..3 {
                let (a, b) = (f.verts[k], f.verts[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let hyp = f.rhombus.is_some() && k == 0;
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(PrimalEdge { ends: (a, b), left: None, right: None, hypotenuse: hyp });
                    edges.len() - 1
                });
                let slot = if edges[e].ends == (a, b) { &mut edges[e].left } else { &mut edges[e].right };
                if slot.is_some() {
                    return Err(Error::MalformedPatch(format!("edge {a}-{b} has overlapping faces")));
                }
                *slot = Some(fi);
                fe[k] = e;
            }
            face_edges.push(fe);
        }
        for e in &edges {
            if let (Some(l), Some(r)) = (e.left, e.right) {
                if faces[l].color == faces[r].color {
                    return Err(Error::Geometry(format!("adjacent faces {l} and {r} share a color")));
                }
            }
        }
        let mut vertex_faces = vec![Vec::new(); vertices.len()];
        for (fi, f) in faces.iter().enumerate() {
            for &v in &f.verts {
                vertex_faces[v].push(fi);
            }
        }
        let mut interior = vec![false; vertices.len()];
        for (v, list) in vertex_faces.iter_mut().enumerate() {
            let pv = vertices[v].pos;
            let centroid = |f: &Face| f.verts.iter().map(|&u| vertices[u].pos).sum::<Point>() / 3.0;
            list.sort_by(|&a, &b| {
                let ta = ccw_angle(Point::new(1.0, 0.0), centroid(&faces[a]) - pv);
                let tb = ccw_angle(Point::new(1.0, 0.0), centroid(&faces[b]) - pv);
                ta.partial_cmp(&tb).unwrap()
            });
            interior[v] = !list.is_empty();
        }
        for e in &edges {
            if e.left.is_none() || e.right.is_none() {
                interior[e.ends.0] = false;
                interior[e.ends.1] = false;
            }
        }
        Ok(TriangulatedPatch { base, vertices, faces, edges, face_edges, vertex_faces, interior })
    }

    /// Edge ids of a face; edge `k` joins `verts[k]` to `verts[k + 1]`.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    /// Faces around a vertex in counterclockwise order.
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.interior[v]
    }

    /// The face across edge `e` from face `f`.
    pub fn across(&self, e: usize, f: usize) -> Option<usize> {
        let pe = &self.edges[e];
        if pe.left == Some(f) {
            pe.right
        } else {
            pe.left
        }
    }

    /// Orientation of edge `e` as used by the first height function: counterclockwise
    /// around black faces. Returns the edge as (tail, head).
    pub fn oriented(&self, e: usize) -> (usize, usize) {
        let pe = &self.edges[e];
        let (a, b) = pe.ends;
        match (pe.left, pe.right) {
            (Some(l), _) if self.faces[l].color == Color::Black => (a, b),
            (_, Some(r)) if self.faces[r].color == Color::Black => (b, a),
            (Some(_), _) => (b, a),
            (None, Some(_)) => (a, b),
            (None, None) => unreachable!("edge without faces"),
        }
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.iter().position(|e| e.ends == (a, b) || e.ends == (b, a))
    }
}

fn circumcenter(a: Point, b: Point, c: Point) -> Point {
    let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
    let (a2, b2, c2) = (a.norm_sqr(), b.norm_sqr(), c.norm_sqr());
    Point::new(
        (a2 * (b.im - c.im) + b2 * (c.im - a.im) + c2 * (a.im - b.im)) / d,
        (a2 * (c.re - b.re) + b2 * (a.re - c.re) + c2 * (b.re - a.re)) / d,
    )
}
