//! The Dirac operator on the bipartite dual, its inverse through the local contour formula,
//! the Kasteleyn (real Dirac) operator under a clockwise-odd orientation, and the far-field
//! expansion of the inverse.

mod inverse;
mod path;

pub use inverse::{
    asymptotic_angles, asymptotic_inverse_dirac, branch_window, contour_integral, inverse_dirac, inverse_dirac_column,
    inverse_real_dirac, residue_sum, BranchWindow, InverseValue, Method, BRANCH_MARGIN,
};
pub use path::{
    default_path, path_function, path_function_table, real_path_function, real_path_function_table, PathFunction, Pole,
    RVertex, ROOT_TOL,
};

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::geometry::{Color, IsoradialDual};
use crate::linalg::solve_gf2;
use crate::{Error, Result};

/// Edge orientation of a bipartite graph; `w_to_b[e]` is true when edge `e` points from its
/// white end to its black end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    pub w_to_b: Vec<bool>,
}

impl Orientation {
    /// The indicator `𝕀_{(w,b)}`: 0 when oriented from `w` to `b`.
    pub fn indicator(&self, e: usize) -> u8 {
        u8::from(!self.w_to_b[e])
    }

    /// `(-1)^{𝕀_{(w,b)}}`.
    pub fn sign(&self, e: usize) -> f64 {
        if self.w_to_b[e] {
            1.0
        } else {
            -1.0
        }
    }

    /// Number of edges of `cycle` pointing along the traversal. Each entry is
    /// `(edge, starts at the white end)`.
    pub fn co_oriented(&self, cycle: &[(usize, bool)]) -> usize {
        cycle.iter().filter(|&&(e, from_white)| self.w_to_b[e] == from_white).count()
    }
}

/// Clockwise traversal of the dual cycle around every interior primal vertex, as
/// `(edge, starts at the white end)` pairs.
pub fn face_cycles(dual: &IsoradialDual) -> Vec<Vec<(usize, bool)>> {
    let tri = &dual.tri;
    (0..tri.vertices.len())
        .filter(|&v| tri.is_interior(v))
        .filter_map(|v| {
            let faces = tri.vertex_faces(v);
            let d = faces.len();
            (0..d)
                .rev()
                .map(|k| {
                    let (from, to) = (faces[(k + 1) % d], faces[k]);
                    dual.edge_between(from, to).map(|e| (e, dual.vertices[from].color == Color::White))
                })
                .collect::<Option<Vec<_>>>()
        })
        .collect()
}

/// Solves the parity conditions "odd number of co-oriented edges" on the given cycles.
pub fn parity_orientation(n_edges: usize, cycles: &[Vec<(usize, bool)>]) -> Option<Orientation> {
    // co-oriented iff w_to_b == from_white, so the count is Σ w_to_b + #(from black) mod 2
    let rows: Vec<Vec<usize>> = cycles
        .iter()
        .map(|c| {
            let mut r: Vec<usize> = c.iter().map(|&(e, _)| e).collect();
            r.sort_unstable();
            // an edge met twice contributes nothing
            let mut out = Vec::new();
            let mut i = 0;
            while i < r.len() {
                let mut j = i;
                while j < r.len() && r[j] == r[i] {
                    j += 1;
                }
                if (j - i) % 2 == 1 {
                    out.push(r[i]);
                }
                i = j;
            }
            out
        })
        .collect();
    let rhs: Vec<bool> = cycles.iter().map(|c| c.iter().filter(|&&(_, fw)| !fw).count() % 2 == 0).collect();
    solve_gf2(&rows, &rhs, n_edges).map(|w_to_b| Orientation { w_to_b })
}

/// A clockwise-odd orientation: a spanning tree oriented white to black, then each face
/// with a single unoriented edge fixes that edge, peeling the dual tree from its leaves.
pub fn clockwise_odd_orientation(dual: &IsoradialDual) -> Result<Orientation> {
    let n = dual.edges.len();
    let cycles = face_cycles(dual);
    let mut known: Vec<Option<bool>> = vec![None; n];
    let mut seen = vec![false; dual.len()];
    for root in 0..dual.len() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &e in dual.incident(v) {
                let u = dual.other(e, v);
                if !seen[u] {
                    seen[u] = true;
                    known[e] = Some(true);
                    queue.push_back(u);
                }
            }
        }
    }
    let mut faces_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, cycle) in cycles.iter().enumerate() {
        for &(e, _) in cycle {
            faces_of[e].push(c);
        }
    }
    let unknown = |c: &Vec<(usize, bool)>, known: &[Option<bool>]| c.iter().filter(|&&(e, _)| known[e].is_none()).count();
    let mut queue: VecDeque<usize> = (0..cycles.len()).filter(|&c| unknown(&cycles[c], &known) == 1).collect();
    while let Some(c) = queue.pop_front() {
        let cycle = &cycles[c];
        let Some(&(e, from_white)) = cycle.iter().find(|&&(e, _)| known[e].is_none()) else { continue };
        let co = cycle.iter().filter(|&&(f, fw)| f != e && known[f] == Some(fw)).count();
        // make the total odd
        known[e] = Some(if co % 2 == 0 { from_white } else { !from_white });
        for &d in &faces_of[e] {
            if unknown(&cycles[d], &known) == 1 {
                queue.push_back(d);
            }
        }
    }
    let peeled = Orientation { w_to_b: known.iter().map(|k| k.unwrap_or(true)).collect() };
    if cycles.iter().all(|c| peeled.co_oriented(c) % 2 == 1) {
        return Ok(peeled);
    }
    // multiply connected patches: the peeling can stall, solve the parities directly
    parity_orientation(n, &cycles).ok_or_else(|| Error::Orientation("no clockwise-odd orientation exists".into()))
}

/// `K(w, b)` per dual edge.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracMatrix {
    pub values: Vec<Complex64>,
}

/// `𝖪(w, b)` per dual edge, with the orientation that produced the signs.
#[derive(Clone, Debug, PartialEq)]
pub struct KasteleynMatrix {
    pub orientation: Orientation,
    pub values: Vec<f64>,
}

/// `K(w, b) = i (e^{iβ} - e^{iα})` from the edge's rhombus.
pub fn dirac_matrix(dual: &IsoradialDual) -> DiracMatrix {
    let values = dual
        .edges
        .iter()
        .map(|e| {
            let r = &e.rhombus;
            Complex64::i() * (Complex64::from_polar(1.0, r.beta) - Complex64::from_polar(1.0, r.alpha))
        })
        .collect();
    DiracMatrix { values }
}

pub fn real_dirac_matrix(dual: &IsoradialDual, orientation: &Orientation) -> KasteleynMatrix {
    let values = dual.edges.iter().enumerate().map(|(i, e)| orientation.sign(i) * e.nu).collect();
    KasteleynMatrix { orientation: orientation.clone(), values }
}

/// White and black dual vertices in increasing order: the row and column labels of dense
/// `W x B` matrices.
pub fn color_classes(dual: &IsoradialDual) -> (Vec<usize>, Vec<usize>) {
    (dual.whites(), dual.blacks())
}

fn dense<T: nalgebra::Scalar + Copy + std::ops::AddAssign>(
    dual: &IsoradialDual,
    values: &[T],
    zero: T,
) -> (Vec<usize>, Vec<usize>, DMatrix<T>) {
    let (whites, blacks) = color_classes(dual);
    let mut row = vec![usize::MAX; dual.len()];
    for (i, &w) in whites.iter().enumerate() {
        row[w] = i;
    }
    for (j, &b) in blacks.iter().enumerate() {
        row[b] = j;
    }
    let mut m = DMatrix::from_element(whites.len(), blacks.len(), zero);
    for (e, d) in dual.edges.iter().enumerate() {
        m[(row[d.w], row[d.b])] += values[e];
    }
    (whites, blacks, m)
}

impl DiracMatrix {
    /// `K(v1, v2)`, with `K(b, w) = conj K(w, b)` and zero off the edges.
    pub fn entry(&self, dual: &IsoradialDual, v1: usize, v2: usize) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for &e in dual.incident(v1) {
            if dual.other(e, v1) == v2 {
                let d = &dual.edges[e];
                s += if d.w == v1 { self.values[e] } else { self.values[e].conj() };
            }
        }
        s
    }

    /// Rows are white vertices, columns black ones, both in increasing order.
    pub fn to_dense(&self, dual: &IsoradialDual) -> (Vec<usize>, Vec<usize>, DMatrix<Complex64>) {
        dense(dual, &self.values, Complex64::new(0.0, 0.0))
    }
}

impl KasteleynMatrix {
    /// `𝖪(v1, v2)`, with `𝖪(b, w) = -𝖪(w, b)`.
    pub fn entry(&self, dual: &IsoradialDual, v1: usize, v2: usize) -> f64 {
        let mut s = 0.0;
        for &e in dual.incident(v1) {
            if dual.other(e, v1) == v2 {
                s += if dual.edges[e].w == v1 { self.values[e] } else { -self.values[e] };
            }
        }
        s
    }

    pub fn to_dense(&self, dual: &IsoradialDual) -> (Vec<usize>, Vec<usize>, DMatrix<f64>) {
        dense(dual, &self.values, 0.0)
    }
}
