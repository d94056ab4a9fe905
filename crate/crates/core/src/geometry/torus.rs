use std::collections::HashMap;

use super::{cw_corner_cycles, Color, IsoradialDual, Point, TriangulatedPatch};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct TorusFace {
    pub domain_face: usize,
    /// Copy of the input domain, in units of the input lattice vectors.
    pub cell: (usize, usize),
    pub color: Color,
    pub pos: Point,
}

#[derive(Clone, Debug)]
pub struct TorusEdge {
    pub w: usize,
    pub b: usize,
    pub nu: f64,
    /// Crosses the reference cycle running along the first lattice vector.
    pub crosses_horizontal: bool,
    /// Crosses the reference cycle running along the second lattice vector.
    pub crosses_vertical: bool,
}

/// Quotient of a periodic triangulated tiling by `n` times its (possibly doubled) lattice.
#[derive(Clone, Debug)]
pub struct TorusGraph {
    pub fundamental_domain: IsoradialDual,
    pub n: usize,
    /// Period lattice of the colored tiling; an input vector is doubled when its
    /// translation swaps face colors.
    pub lattice: [Point; 2],
    /// Copies of the input domain along each input lattice vector.
    pub cells: (usize, usize),
    pub faces: Vec<TorusFace>,
    pub edges: Vec<TorusEdge>,
    face_edges: Vec<[usize; 3]>,
    edge_faces: Vec<(Option<usize>, Option<usize>)>,
}

pub fn torus_quotient(tri: &TriangulatedPatch, lattice: [Point; 2], n: usize) -> Result<TorusGraph> {
    if n == 0 {
        return Err(Error::InvalidRegion("torus scale n must be positive".into()));
    }
    let det = lattice[0].re * lattice[1].im - lattice[0].im * lattice[1].re;
    if det.abs() < 1e-9 {
        return Err(Error::LatticeMismatch("lattice vectors are collinear".into()));
    }
    let classes = vertex_classes(tri, lattice, det)?;
    let mut last = None;
    for doubling in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        match build(tri, lattice, &classes, doubling, n) {
            Ok(t) => return Ok(t),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

/// Root vertex and integer cell offset of every domain vertex.
fn vertex_classes(tri: &TriangulatedPatch, lattice: [Point; 2], det: f64) -> Result<Vec<(usize, (i64, i64))>> {
    let nv = tri.vertices.len();
    let mut class: Vec<Option<(usize, (i64, i64))>> = vec![None; nv];
    for u in 0..nv {
        if class[u].is_some() {
            continue;
        }
        class[u] = Some((u, (0, 0)));
        for v in u + 1..nv {
            if class[v].is_some() {
                continue;
            }
            let d = tri.vertices[v].pos - tri.vertices[u].pos;
            let k = (d.re * lattice[1].im - d.im * lattice[1].re) / det;
            let l = (lattice[0].re * d.im - lattice[0].im * d.re) / det;
            if (k - k.round()).abs() < 1e-7 && (l - l.round()).abs() < 1e-7 {
                class[v] = Some((u, (k.round() as i64, l.round() as i64)));
            }
        }
    }
    Ok(class.into_iter().map(Option::unwrap).collect())
}

fn build(
    tri: &TriangulatedPatch,
    lattice: [Point; 2],
    classes: &[(usize, (i64, i64))],
    doubling: (usize, usize),
    n: usize,
) -> Result<TorusGraph> {
    let na = n * doubling.0;
    let nb = n * doubling.1;
    let nf = tri.faces.len();
    let wrap = |x: i64, m: usize| x.rem_euclid(m as i64);
    let mut faces = Vec::with_capacity(nf * na * nb);
    for j in 0..nb {
        for i in 0..na {
            for (f, face) in tri.faces.iter().enumerate() {
                let flip = (doubling.0 == 2 && i % 2 == 1) ^ (doubling.1 == 2 && j % 2 == 1);
                let color = if flip { face.color.flip() } else { face.color };
                let pos = face.circumcenter + lattice[0] * i as f64 + lattice[1] * j as f64;
                faces.push(TorusFace { domain_face: f, cell: (i, j), color, pos });
            }
        }
    }
    // primal edge key: (root u, cell of u mod N, root v, cell offset v - u), normalized
    type Key = (usize, (i64, i64), usize, (i64, i64));
    let mut keys: HashMap<Key, usize> = HashMap::new();
    let mut edge_faces: Vec<(Option<usize>, Option<usize>)> = Vec::new();
    // for each side: (face, absolute cell of the edge's first endpoint in that face's frame)
    let mut edge_sides: Vec<Vec<(usize, (i64, i64))>> = Vec::new();
    let mut face_edges = Vec::with_capacity(faces.len());
    for (tf, face) in faces.iter().enumerate() {
        let dom = &tri.faces[face.domain_face];
        let cell = (face.cell.0 as i64, face.cell.1 as i64);
        let mut fe = [0; 3];
        for k in 0..3 {
            let (u, v) = (dom.verts[k], dom.verts[(k + 1) % 3]);
            let (ru, ou) = classes[u];
            let (rv, ov) = classes[v];
            let cu = (cell.0 + ou.0, cell.1 + ou.1);
            let cv = (cell.0 + ov.0, cell.1 + ov.1);
            let fwd: Key = (ru, (wrap(cu.0, na), wrap(cu.1, nb)), rv, (cv.0 - cu.0, cv.1 - cu.1));
            let bwd: Key = (rv, (wrap(cv.0, na), wrap(cv.1, nb)), ru, (cu.0 - cv.0, cu.1 - cv.1));
            let (key, forward) = if fwd <= bwd { (fwd, true) } else { (bwd, false) };
            let id = *keys.entry(key).or_insert_with(|| {
                edge_faces.push((None, None));
                edge_sides.push(Vec::new());
                edge_faces.len() - 1
            });
            let slot = if forward { &mut edge_faces[id].0 } else { &mut edge_faces[id].1 };
            if slot.is_some() {
                return Err(Error::LatticeMismatch("faces overlap under the lattice translations".into()));
            }
            *slot = Some(tf);
            let anchor = if forward { cu } else { cv };
            edge_sides[id].push((tf, anchor));
            fe[k] = id;
        }
        face_edges.push(fe);
    }
    let mut edges = Vec::with_capacity(edge_faces.len());
    for (id, sides) in edge_faces.iter().enumerate() {
        let (Some(l), Some(r)) = *sides else {
            return Err(Error::LatticeMismatch("the quotient has boundary edges".into()));
        };
        if faces[l].color == faces[r].color {
            return Err(Error::LatticeMismatch("the quotient dual is not bipartite".into()));
        }
        // lift r next to l: shift by the difference of the shared endpoint's absolute cells
        let (fl, al) = edge_sides[id].iter().copied().find(|s| s.0 == l).unwrap();
        let (_, ar) = edge_sides[id].iter().copied().find(|s| s.0 == r).unwrap();
        let cl = faces[fl].cell;
        let cr = faces[r].cell;
        let lifted = (cr.0 as i64 + al.0 - ar.0, cr.1 as i64 + al.1 - ar.1);
        let wraps_a = lifted.0.div_euclid(na as i64) - (cl.0 as i64).div_euclid(na as i64);
        let wraps_b = lifted.1.div_euclid(nb as i64) - (cl.1 as i64).div_euclid(nb as i64);
        if wraps_a.abs() > 1 || wraps_b.abs() > 1 {
            return Err(Error::LatticeMismatch("an edge crosses a reference cycle twice".into()));
        }
        let (w, b) = if faces[l].color == Color::White { (l, r) } else { (r, l) };
        let dom_edge = tri.face_edges(faces[l].domain_face);
        let k = face_edges[l].iter().position(|&x| x == id).unwrap();
        let (pa, pb) = tri.edges[dom_edge[k]].ends;
        let nu = (tri.vertices[pa].pos - tri.vertices[pb].pos).norm();
        edges.push(TorusEdge { w, b, nu, crosses_horizontal: wraps_b != 0, crosses_vertical: wraps_a != 0 });
    }
    let lattice = [lattice[0] * doubling.0 as f64, lattice[1] * doubling.1 as f64];
    Ok(TorusGraph {
        fundamental_domain: super::dual_graph(tri),
        n,
        lattice,
        cells: (na, nb),
        faces,
        edges,
        face_edges,
        edge_faces,
    })
}

impl TorusGraph {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn whites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.faces[v].color == Color::White).collect()
    }

    pub fn blacks(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.faces[v].color == Color::Black).collect()
    }

    /// Torus dual edge crossing the domain's primal edge `e` inside cell `cell` on the side of
    /// face `domain_face`.
    pub fn edge_at(&self, domain_face: usize, cell: (usize, usize), k: usize) -> usize {
        let nf = self.fundamental_domain.len();
        let tf = (cell.1 * self.cells.0 + cell.0) * nf + domain_face;
        self.face_edges[tf][k]
    }

    /// Index of the torus face that is copy `cell` of `domain_face`.
    pub fn face_index(&self, domain_face: usize, cell: (usize, usize)) -> usize {
        let nf = self.fundamental_domain.len();
        (cell.1 * self.cells.0 + cell.0) * nf + domain_face
    }

    /// Clockwise dual-face cycles, one per torus vertex, as `(edge, from face)` pairs.
    pub fn face_cycles(&self) -> Vec<Vec<(usize, usize)>> {
        cw_corner_cycles(&self.face_edges, &self.edge_faces)
    }
}
