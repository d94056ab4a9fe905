use nalgebra::DMatrix;

use super::CylinderQuery;
use crate::dirac::parity_orientation;
use crate::geometry::{torus_quotient, Color, TorusGraph};
use crate::linalg::{check_dim, det, permutation_sign};
use crate::tilings::for_each_matching;
use crate::{Error, Result};

/// The four Kasteleyn matrices of a torus, rows white and columns black.
///
/// `matrices[1]` (resp. `[2]`) is `matrices[0]` with the signs of the edges crossing the
/// horizontal (resp. vertical) reference cycle reversed, and `matrices[3]` has both sets
/// reversed. `matrices[0]` is calibrated so that `(-d1 + d2 + d3 + d4) / 2` is the partition
/// function.
#[derive(Clone, Debug)]
pub struct TorusKasteleynSet {
    pub whites: Vec<usize>,
    pub blacks: Vec<usize>,
    /// Base orientation, lifted periodically from the smallest torus of the same domain.
    pub w_to_b: Vec<bool>,
    /// Extra reversals applied in `matrices[0]` on horizontal and vertical crossing edges.
    pub flips: (bool, bool),
    /// Whether the row of the first white vertex is negated in every matrix.
    pub negated: bool,
    pub matrices: [DMatrix<f64>; 4],
    pub dets: [f64; 4],
}

fn index_of(torus: &TorusGraph) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let whites = torus.whites();
    let blacks = torus.blacks();
    let mut idx = vec![0; torus.len()];
    for (i, &w) in whites.iter().enumerate() {
        idx[w] = i;
    }
    for (j, &b) in blacks.iter().enumerate() {
        idx[b] = j;
    }
    (whites, blacks, idx)
}

fn cycles(torus: &TorusGraph) -> Vec<Vec<(usize, bool)>> {
    torus
        .face_cycles()
        .into_iter()
        .map(|c| c.into_iter().map(|(e, f)| (e, torus.faces[f].color == Color::White)).collect())
        .collect()
}

fn clockwise_odd(torus: &TorusGraph, w_to_b: &[bool]) -> bool {
    cycles(torus).iter().all(|c| c.iter().filter(|&&(e, fw)| w_to_b[e] == fw).count() % 2 == 1)
}

/// The torus of scale 1 over the same fundamental domain and doubling.
fn unit_torus(torus: &TorusGraph) -> Result<TorusGraph> {
    if torus.n == 1 {
        return Ok(torus.clone());
    }
    let d = (torus.cells.0 / torus.n, torus.cells.1 / torus.n);
    let lattice = [torus.lattice[0] / d.0 as f64, torus.lattice[1] / d.1 as f64];
    let t1 = torus_quotient(&torus.fundamental_domain.tri, lattice, 1)?;
    if t1.cells != d {
        return Err(Error::LatticeMismatch("unit torus has a different doubling".into()));
    }
    Ok(t1)
}

/// Clockwise-odd orientation of the unit torus, copied into every cell of `torus`.
fn lifted_orientation(torus: &TorusGraph, t1: &TorusGraph) -> Result<Vec<bool>> {
    let base = parity_orientation(t1.edges.len(), &cycles(t1))
        .ok_or_else(|| Error::Orientation("the unit torus has no clockwise-odd orientation".into()))?
        .w_to_b;
    let nf = torus.fundamental_domain.len();
    let mut out: Vec<Option<bool>> = vec![None; torus.edges.len()];
    for j in 0..torus.cells.1 {
        for i in 0..torus.cells.0 {
            let c1 = (i % t1.cells.0, j % t1.cells.1);
            for f in 0..nf {
                for k in 0..3 {
                    let e = torus.edge_at(f, (i, j), k);
                    let v = base[t1.edge_at(f, c1, k)];
                    if out[e].is_some_and(|o| o != v) {
                        return Err(Error::Orientation("orientation is not periodic".into()));
                    }
                    out[e] = Some(v);
                }
            }
        }
    }
    let out: Vec<bool> = out.into_iter().map(|o| o.unwrap_or(true)).collect();
    if !clockwise_odd(torus, &out) {
        return Err(Error::Orientation("lifted orientation is not clockwise-odd".into()));
    }
    Ok(out)
}

fn signed_weight(torus: &TorusGraph, w_to_b: &[bool], e: usize, flips: (bool, bool)) -> f64 {
    let edge = &torus.edges[e];
    let reversed = !w_to_b[e] ^ (flips.0 && edge.crosses_horizontal) ^ (flips.1 && edge.crosses_vertical);
    if reversed {
        -edge.nu
    } else {
        edge.nu
    }
}

fn matrix(torus: &TorusGraph, w_to_b: &[bool], idx: &[usize], flips: (bool, bool), negated: bool) -> DMatrix<f64> {
    let n = idx.len() / 2;
    let mut m = DMatrix::zeros(n, n);
    for (e, edge) in torus.edges.iter().enumerate() {
        m[(idx[edge.w], idx[edge.b])] += signed_weight(torus, w_to_b, e, flips);
    }
    if negated && n > 0 {
        m.row_mut(0).neg_mut();
    }
    m
}

fn variants(f: (bool, bool)) -> [(bool, bool); 4] {
    [f, (!f.0, f.1), (f.0, !f.1), (!f.0, !f.1)]
}

impl TorusKasteleynSet {
    pub fn new(torus: &TorusGraph) -> Result<Self> {
        let t1 = unit_torus(torus)?;
        let calibrated = Self::calibrate(torus, lifted_orientation(torus, &t1)?)?;
        let unit = if torus.n == 1 { calibrated.clone() } else { Self::calibrate(&t1, lifted_orientation(&t1, &t1)?)? };
        unit.validate(&t1)?;
        Ok(calibrated)
    }

    /// Picks the reversal pattern and overall sign maximizing `(-d1 + d2 + d3 + d4) / 2`: with a
    /// clockwise-odd base orientation the matching signs depend only on the parity class, and
    /// any other pattern weights some class negatively.
    fn calibrate(torus: &TorusGraph, w_to_b: Vec<bool>) -> Result<Self> {
        let (whites, blacks, idx) = index_of(torus);
        if whites.len() != blacks.len() {
            return Err(Error::NoMatching);
        }
        check_dim(whites.len())?;
        let base = |f: (bool, bool)| det(&matrix(torus, &w_to_b, &idx, f, false));
        let d = [base((false, false)), base((true, false)), base((false, true)), base((true, true))];
        let slot = |f: (bool, bool)| usize::from(f.0) + 2 * usize::from(f.1);
        let mut best: Option<(f64, (bool, bool), bool)> = None;
        for f in [(false, false), (true, false), (false, true), (true, true)] {
            let v = variants(f).map(|g| d[slot(g)]);
            let z = (-v[0] + v[1] + v[2] + v[3]) / 2.0;
            for (z, negated) in [(z, false), (-z, true)] {
                if best.is_none_or(|b| z > b.0) {
                    best = Some((z, f, negated));
                }
            }
        }
        let (z, flips, negated) = best.unwrap();
        if !(z > 0.0) {
            return Err(Error::NoMatching);
        }
        let matrices = variants(flips).map(|g| matrix(torus, &w_to_b, &idx, g, negated));
        let sign = if negated { -1.0 } else { 1.0 };
        let dets = variants(flips).map(|g| sign * d[slot(g)]);
        Ok(TorusKasteleynSet { whites, blacks, w_to_b, flips, negated, matrices, dets })
    }

    /// Checks by enumeration that a matching carries sign `+` in `det matrices[0]` exactly when
    /// it crosses both reference cycles an even number of times.
    fn validate(&self, torus: &TorusGraph) -> Result<()> {
        let (_, _, idx) = index_of(torus);
        let pairs: Vec<(usize, usize)> = torus.edges.iter().map(|e| (e.w, e.b)).collect();
        let mut bad = None;
        let mut z = 0.0;
        for_each_matching(torus.len(), &pairs, |m| {
            let mut perm = vec![0; m.len()];
            let mut sign = if self.negated { -1.0 } else { 1.0 };
            let (mut h, mut v) = (false, false);
            for &e in m {
                let edge = &torus.edges[e];
                perm[idx[edge.w]] = idx[edge.b];
                sign *= signed_weight(torus, &self.w_to_b, e, self.flips).signum();
                h ^= edge.crosses_horizontal;
                v ^= edge.crosses_vertical;
            }
            sign *= permutation_sign(&perm);
            let expected = if h || v { -1.0 } else { 1.0 };
            if sign != expected {
                bad = Some((h, v));
            }
            z += m.iter().map(|&e| torus.edges[e].nu).product::<f64>();
        });
        if let Some((h, v)) = bad {
            return Err(Error::Orientation(format!(
                "parity class (h={}, v={}) has matchings of the wrong sign",
                u8::from(h),
                u8::from(v)
            )));
        }
        if (self.partition() - z).abs() > 1e-9 * z {
            return Err(Error::Orientation(format!("determinant formula gives {} but enumeration {z}", self.partition())));
        }
        Ok(())
    }

    /// `(-det K1 + det K2 + det K3 + det K4) / 2`.
    pub fn partition(&self) -> f64 {
        let d = &self.dets;
        (-d[0] + d[1] + d[2] + d[3]) / 2.0
    }

    /// The averaging weights `∓ det K_l / (2Z)`; they sum to 1.
    pub fn weights(&self) -> [f64; 4] {
        let z = self.partition();
        let d = &self.dets;
        [-d[0] / (2.0 * z), d[1] / (2.0 * z), d[2] / (2.0 * z), d[3] / (2.0 * z)]
    }

    /// Boltzmann probability of the cylinder on the torus. Each term
    /// `det K_l · det[K_l^{-1}(b_i, w_j)]` is evaluated as the complementary minor of `K_l`,
    /// so singular matrices need no special case.
    pub fn local_statistic(&self, torus: &TorusGraph, query: &CylinderQuery) -> Result<f64> {
        let (_, _, idx) = index_of(torus);
        for &e in &query.edges {
            let edge = torus.edges.get(e).ok_or_else(|| Error::InvalidQuery(format!("edge {e} out of range")))?;
            if edge.crosses_horizontal || edge.crosses_vertical {
                return Err(Error::InvalidQuery(format!("edge {e} crosses a reference cycle")));
            }
        }
        if query.has_repeated_vertex(|e| (torus.edges[e].w, torus.edges[e].b)) {
            return Ok(0.0);
        }
        let rows: Vec<usize> = query.edges.iter().map(|&e| idx[torus.edges[e].w]).collect();
        let cols: Vec<usize> = query.edges.iter().map(|&e| idx[torus.edges[e].b]).collect();
        let (rs, sr) = sort_with_sign(&rows);
        let (cs, sc) = sort_with_sign(&cols);
        let parity: usize = rs.iter().chain(&cs).sum();
        let jacobi = sr * sc * if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
        let z = self.partition();
        let coeff = [-1.0, 1.0, 1.0, 1.0];
        let mut total = 0.0;
        for (l, m) in self.matrices.iter().enumerate() {
            let prod: f64 = query.edges.iter().map(|&e| self.entry(m, torus, &idx, e)).product();
            let minor = m.clone().remove_rows_at(&rs).remove_columns_at(&cs);
            total += coeff[l] * prod * jacobi * det(&minor) / (2.0 * z);
        }
        Ok(total)
    }

    /// Contribution of edge `e` alone to its entry of `m`.
    fn entry(&self, m: &DMatrix<f64>, torus: &TorusGraph, idx: &[usize], e: usize) -> f64 {
        let edge = &torus.edges[e];
        let s = signed_weight(torus, &self.w_to_b, e, self.flips);
        // query edges cross no cycle, so all four matrices agree on them up to the row negation
        if self.negated && idx[edge.w] == 0 && m.nrows() > 0 {
            -s
        } else {
            s
        }
    }
}

fn sort_with_sign(v: &[usize]) -> (Vec<usize>, f64) {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by_key(|&i| v[i]);
    (order.iter().map(|&i| v[i]).collect(), permutation_sign(&order))
}

pub fn torus_kasteleyn_set(torus: &TorusGraph) -> Result<TorusKasteleynSet> {
    TorusKasteleynSet::new(torus)
}

/// Weighted number of dimer configurations of the torus, from the four Kasteleyn determinants.
pub fn torus_partition(torus: &TorusGraph) -> Result<f64> {
    Ok(TorusKasteleynSet::new(torus)?.partition())
}

pub fn torus_local_statistic(torus: &TorusGraph, query: &CylinderQuery) -> Result<f64> {
    TorusKasteleynSet::new(torus)?.local_statistic(torus, query)
}
