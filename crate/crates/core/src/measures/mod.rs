//! Boltzmann measures on finite patches and tori, the local-statistics formula for the
//! infinite-volume Gibbs measure, its far-field approximation, and the product measure on
//! triangular quadri-tilings.

mod quadri;
mod torus;

pub use quadri::{honeycomb_of, lozenges_of_edge, quadri_gibbs};
pub use torus::{torus_kasteleyn_set, torus_local_statistic, torus_partition, TorusKasteleynSet};

use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::dirac::{
    asymptotic_angles, asymptotic_inverse_dirac, clockwise_odd_orientation, dirac_matrix, inverse_dirac,
    inverse_real_dirac, real_dirac_matrix, KasteleynMatrix, Method, Orientation,
};
use crate::geometry::IsoradialDual;
use crate::linalg::{check_dim, det};
use crate::tilings::for_each_matching;
use crate::{Error, Result};

/// The cylinder event "all of these dual edges are matched".
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CylinderQuery {
    pub edges: Vec<usize>,
}

impl CylinderQuery {
    pub fn new(edges: Vec<usize>) -> Self {
        CylinderQuery { edges }
    }

    /// Parses `w:b,w:b,...` (dual vertex ids) against the edges of `dual`.
    pub fn parse(s: &str, dual: &IsoradialDual) -> Result<Self> {
        let pairs = parse_pairs(s)?;
        let mut edges = Vec::with_capacity(pairs.len());
        for (w, b) in pairs {
            let e = dual
                .edge_between(w, b)
                .filter(|&e| dual.edges[e].w == w)
                .ok_or_else(|| Error::InvalidQuery(format!("{w}:{b} is not a white-black dual edge")))?;
            edges.push(e);
        }
        Ok(CylinderQuery { edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// True when two query edges share an endpoint.
    pub fn has_repeated_vertex(&self, ends: impl Fn(usize) -> (usize, usize)) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().any(|&e| {
            let (w, b) = ends(e);
            !seen.insert(w) || !seen.insert(b)
        })
    }
}

/// Parses `a:b,c:d` into integer pairs; the empty string is the empty list.
pub fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|tok| {
            let (a, b) = tok
                .split_once(':')
                .ok_or_else(|| Error::InvalidQuery(format!("expected W:B, got {tok:?}")))?;
            let p = |t: &str| t.trim().parse::<usize>().map_err(|_| Error::InvalidQuery(format!("bad vertex id {t:?}")));
            Ok((p(a)?, p(b)?))
        })
        .collect()
}

/// A probability computed from complex quantities, with the size of its imaginary part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Statistic {
    pub value: f64,
    pub imag: f64,
}

impl From<Complex64> for Statistic {
    fn from(z: Complex64) -> Self {
        Statistic { value: z.re, imag: z.im }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoltzmannMethod {
    Enumerate,
    Determinant,
}

impl FromStr for BoltzmannMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(BoltzmannMethod::Enumerate),
            "determinant" => Ok(BoltzmannMethod::Determinant),
            _ => Err(Error::InvalidQuery(format!("unknown method {s:?}"))),
        }
    }
}

fn check_query(dual: &IsoradialDual, query: &CylinderQuery) -> Result<()> {
    match query.edges.iter().find(|&&e| e >= dual.edges.len()) {
        Some(e) => Err(Error::InvalidQuery(format!("edge {e} out of range"))),
        None => Ok(()),
    }
}

fn ends(dual: &IsoradialDual) -> impl Fn(usize) -> (usize, usize) + '_ {
    |e| (dual.edges[e].w, dual.edges[e].b)
}

/// Probability that a Boltzmann-random dimer configuration of the patch contains every
/// query edge, for positive edge weights.
pub fn boltzmann_probability(
    dual: &IsoradialDual,
    weights: &[f64],
    query: &CylinderQuery,
    method: BoltzmannMethod,
) -> Result<f64> {
    if weights.len() != dual.edges.len() {
        return Err(Error::InvalidQuery(format!("{} weights for {} edges", weights.len(), dual.edges.len())));
    }
    if let Some(w) = weights.iter().find(|&&w| !(w > 0.0)) {
        return Err(Error::InvalidQuery(format!("weights must be positive, got {w}")));
    }
    check_query(dual, query)?;
    match method {
        BoltzmannMethod::Enumerate => by_enumeration(dual, weights, query),
        BoltzmannMethod::Determinant => by_determinants(dual, weights, query),
    }
}

fn by_enumeration(dual: &IsoradialDual, weights: &[f64], query: &CylinderQuery) -> Result<f64> {
    let edges: Vec<(usize, usize)> = dual.edges.iter().map(|e| (e.w, e.b)).collect();
    let (mut z, mut hit) = (0.0, 0.0);
    for_each_matching(dual.len(), &edges, |m| {
        let w: f64 = m.iter().map(|&e| weights[e]).product();
        z += w;
        if query.edges.iter().all(|e| m.contains(e)) {
            hit += w;
        }
    });
    if z == 0.0 {
        return Err(Error::NoMatching);
    }
    Ok(hit / z)
}

fn by_determinants(dual: &IsoradialDual, weights: &[f64], query: &CylinderQuery) -> Result<f64> {
    if dual.tri.base.as_ref().is_some_and(|b| !b.simply_connected()) {
        return Err(Error::NotSimplyConnected("Kasteleyn determinants count matchings only on simply connected patches".into()));
    }
    let orientation = clockwise_odd_orientation(dual)?;
    let values = weights.iter().enumerate().map(|(e, w)| orientation.sign(e) * w).collect();
    let (whites, blacks, m) = KasteleynMatrix { orientation, values }.to_dense(dual);
    if whites.len() != blacks.len() {
        return Err(Error::NoMatching);
    }
    check_dim(whites.len())?;
    let row = |v: usize| whites.binary_search(&v).unwrap();
    let col = |v: usize| blacks.binary_search(&v).unwrap();
    let z = det(&m).abs();
    if z < 1e-300 {
        return Err(Error::NoMatching);
    }
    if query.has_repeated_vertex(ends(dual)) {
        return Ok(0.0);
    }
    let drop_rows: Vec<usize> = query.edges.iter().map(|&e| row(dual.edges[e].w)).collect();
    let drop_cols: Vec<usize> = query.edges.iter().map(|&e| col(dual.edges[e].b)).collect();
    let minor = m.clone().remove_rows_at(&sorted(drop_rows)).remove_columns_at(&sorted(drop_cols));
    let prod: f64 = query.edges.iter().map(|&e| weights[e]).product();
    Ok(prod * det(&minor).abs() / z)
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Determinant of a small dense complex matrix given by an entry function.
fn small_det(k: usize, entry: impl Fn(usize, usize) -> Result<Complex64>) -> Result<Complex64> {
    let mut m = DMatrix::from_element(k, k, Complex64::new(0.0, 0.0));
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = entry(i, j)?;
        }
    }
    Ok(det(&m))
}

/// Gibbs-measure probability of the cylinder: `(∏ K(w_i, b_i)) det K^{-1}(b_i, w_j)`, with
/// `K^{-1}` from the local residue formula.
pub fn local_statistic(dual: &IsoradialDual, query: &CylinderQuery) -> Result<Statistic> {
    check_query(dual, query)?;
    let kmat = dirac_matrix(dual);
    let e = &dual.edges;
    let q = &query.edges;
    let d = small_det(q.len(), |i, j| Ok(inverse_dirac(dual, e[q[i]].b, e[q[j]].w, Method::Residues)?.value))?;
    let prod: Complex64 = q.iter().map(|&i| kmat.values[i]).product();
    Ok((prod * d).into())
}

/// The same probability from the real Dirac operator: `(∏ 𝖪(w_i, b_i)) det 𝖪^{-1}(b_i, w_j)`.
pub fn real_local_statistic(dual: &IsoradialDual, orientation: &Orientation, query: &CylinderQuery) -> Result<Statistic> {
    check_query(dual, query)?;
    let kmat = real_dirac_matrix(dual, orientation);
    let e = &dual.edges;
    let q = &query.edges;
    let d = small_det(q.len(), |i, j| inverse_real_dirac(dual, orientation, e[q[i]].b, e[q[j]].w))?;
    let prod: f64 = q.iter().map(|&i| kmat.values[i]).product();
    Ok((d * prod).into())
}

/// The local-statistics formula with every off-diagonal `K^{-1}(b_i, w_j)` replaced by its
/// far-field expansion; only the rhombi at `b_i` and `w_j` enter.
pub fn asymptotic_local_statistic(dual: &IsoradialDual, query: &CylinderQuery) -> Result<Statistic> {
    check_query(dual, query)?;
    let kmat = dirac_matrix(dual);
    let e = &dual.edges;
    let q = &query.edges;
    let d = small_det(q.len(), |i, j| {
        let (b, w) = (e[q[i]].b, e[q[j]].w);
        if i == j {
            return Ok(inverse_dirac(dual, b, w, Method::Residues)?.value);
        }
        let (t1, t2) = asymptotic_angles(dual, w, b)?;
        let (pb, pw) = (dual.vertices[b].pos, dual.vertices[w].pos);
        if (pb - pw).norm() < 1e-9 {
            return Err(Error::InvalidQuery(format!("edges {} and {} are not separated", q[i], q[j])));
        }
        asymptotic_inverse_dirac(pb, pw, t1, t2)
    })?;
    let prod: Complex64 = q.iter().map(|&i| kmat.values[i]).product();
    Ok((prod * d).into())
}
