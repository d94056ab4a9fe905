//! Quadri-tilings as perfect matchings of the dual graph: the tile bijection, height
//! functions, exhaustive enumeration, elementary moves and a Metropolis sampler.

mod enumerate;
mod heights;
mod moves;

pub use enumerate::{count_matchings, enumerate_matchings, for_each_matching};
pub use heights::{height1, height2, tiling_from_height1, HeightField};
pub use moves::{apply_move, elementary_moves, initial_config, sample_mcmc, EdgeWeights, Move, MoveKind, Sampler};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{point_key, EdgeKind, IsoradialDual, Point, RhombusPatch};
use crate::{Error, Result};

/// A perfect matching of an [`IsoradialDual`], stored as sorted edge ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimerConfig {
    pub matched: Vec<usize>,
}

impl DimerConfig {
    pub fn new(mut matched: Vec<usize>) -> Self {
        matched.sort_unstable();
        DimerConfig { matched }
    }

    /// Checks that every dual vertex is covered exactly once.
    pub fn validate(&self, dual: &IsoradialDual) -> Result<()> {
        let mut cover = vec![0u8; dual.len()];
        for &e in &self.matched {
            let d = dual.edges.get(e).ok_or_else(|| Error::InvalidTiling(format!("unknown edge {e}")))?;
            cover[d.w] += 1;
            cover[d.b] += 1;
        }
        match cover.iter().position(|&c| c != 1) {
            None => Ok(()),
            Some(v) => Err(Error::InvalidTiling(format!("dual vertex {v} covered {} times", cover[v]))),
        }
    }

    /// Partner of every dual vertex.
    pub fn partners(&self, dual: &IsoradialDual) -> Vec<usize> {
        let mut p = vec![usize::MAX; dual.len()];
        for &e in &self.matched {
            let d = &dual.edges[e];
            p[d.w] = d.b;
            p[d.b] = d.w;
        }
        p
    }

    pub fn contains(&self, e: usize) -> bool {
        self.matched.binary_search(&e).is_ok()
    }

    /// Product of `weights` over matched edges.
    pub fn weight(&self, weights: &[f64]) -> f64 {
        self.matched.iter().map(|&e| weights[e]).product()
    }

    /// Matched pairs of face ids, in the matching-file layout.
    pub fn face_pairs(&self, dual: &IsoradialDual) -> Vec<[usize; 2]> {
        self.matched.iter().map(|&e| [dual.edges[e].w, dual.edges[e].b]).collect()
    }

    /// Rebuilds a configuration from face pairs.
    pub fn from_face_pairs(dual: &IsoradialDual, pairs: &[[usize; 2]]) -> Result<Self> {
        let mut matched = Vec::with_capacity(pairs.len());
        for &[a, b] in pairs {
            if a >= dual.len() || b >= dual.len() {
                return Err(Error::InvalidTiling(format!("unknown face in pair [{a}, {b}]")));
            }
            let e = dual
                .edge_between(a, b)
                .ok_or_else(|| Error::InvalidTiling(format!("faces {a} and {b} are not adjacent")))?;
            matched.push(e);
        }
        let m = DimerConfig::new(matched);
        m.validate(dual)?;
        Ok(m)
    }
}

/// Two adjacent right triangles; each triangle is `[hyp start, hyp end, right-angle vertex]`
/// counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadriTile {
    pub edge: usize,
    pub faces: [usize; 2],
    pub kind: EdgeKind,
    pub triangles: [[Point; 3]; 2],
}

pub fn matching_to_tiling(dual: &IsoradialDual, m: &DimerConfig) -> Vec<QuadriTile> {
    let tri = &dual.tri;
    m.matched
        .iter()
        .map(|&e| {
            let d = &dual.edges[e];
            let shape = |f: usize| tri.faces[f].verts.map(|v| tri.vertices[v].pos);
            QuadriTile { edge: e, faces: [d.w, d.b], kind: d.kind, triangles: [shape(d.w), shape(d.b)] }
        })
        .collect()
}

/// Recovers the rhombus tiling by grouping triangles around their right-angle vertices.
pub fn underlying_tiling(tiles: &[QuadriTile]) -> Result<RhombusPatch> {
    let mut around: HashMap<(i64, i64), Vec<[Point; 3]>> = HashMap::new();
    for (ti, t) in tiles.iter().enumerate() {
        let [s, u] = t.triangles;
        for tr in [s, u] {
            let (h0, h1, c) = (tr[0], tr[1], tr[2]);
            if ((h1 - h0).norm() - 2.0).abs() > 1e-7 || ((c - h0).conj() * (c - h1)).re.abs() > 1e-7 {
                return Err(Error::InvalidTiling(format!("tile {ti} is not made of right triangles with hypotenuse 2")));
            }
        }
        let shared: Vec<Point> = s.iter().copied().filter(|p| u.iter().any(|q| (p - q).norm() < 1e-7)).collect();
        if shared.len() != 2 {
            return Err(Error::InvalidTiling(format!("tile {ti} triangles do not share an edge")));
        }
        let hyp_glued = [s, u].iter().all(|tr| shared.iter().all(|p| (p - tr[0]).norm() < 1e-7 || (p - tr[1]).norm() < 1e-7));
        if !hyp_glued && (s[2] - u[2]).norm() > 1e-7 {
            return Err(Error::InvalidTiling(format!(
                "tile {ti} glues a right-angle vertex to a hypotenuse vertex"
            )));
        }
        for tr in [s, u] {
            around.entry(point_key(tr[2])).or_default().push(tr);
        }
    }
    let mut centers: Vec<(i64, i64)> = around.keys().copied().collect();
    centers.sort_unstable();
    let mut points: Vec<Point> = Vec::new();
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut rhombi = Vec::new();
    for key in centers {
        let trs = &around[&key];
        if trs.len() != 4 {
            return Err(Error::InvalidTiling(format!("{} triangles meet at a right-angle vertex", trs.len())));
        }
        let c = trs[0][2];
        let mut corners: Vec<Point> = trs.iter().map(|t| t[0]).collect();
        corners.sort_by(|a, b| (a - c).arg().partial_cmp(&(b - c).arg()).unwrap());
        for k in 0..4 {
            let next = trs.iter().find(|t| (t[0] - corners[k]).norm() < 1e-7).unwrap()[1];
            if (next - corners[(k + 1) % 4]).norm() > 1e-7 {
                return Err(Error::InvalidTiling("triangles around a center do not form a rhombus".into()));
            }
        }
        let mut r = [0; 4];
        for k in 0..4 {
            r[k] = *index.entry(point_key(corners[k])).or_insert_with(|| {
                points.push(corners[k]);
                points.len() - 1
            });
        }
        rhombi.push(r);
    }
    RhombusPatch::from_geometry(points, rhombi)
}

/// Matching file: `{"patch": <patch object>, "matched_edges": [[faceA, faceB], ...]}`.
pub fn matching_to_json(dual: &IsoradialDual, m: &DimerConfig) -> serde_json::Value {
    let patch = dual.tri.base.as_ref().map(|p| p.to_json()).unwrap_or(serde_json::Value::Null);
    serde_json::json!({ "patch": patch, "matched_edges": m.face_pairs(dual) })
}

/// Reads a matching file; `base_dir` resolves a patch given as a path string.
pub fn matching_from_json(value: &serde_json::Value, base_dir: &std::path::Path) -> Result<(IsoradialDual, DimerConfig)> {
    let patch = match value.get("patch") {
        Some(serde_json::Value::String(p)) => RhombusPatch::read_json(&base_dir.join(p))?,
        Some(v @ serde_json::Value::Object(_)) => RhombusPatch::from_json(v)?,
        _ => return Err(Error::MalformedPatch("matching file needs a \"patch\" object or path".into())),
    };
    let pairs: Vec<[usize; 2]> = serde_json::from_value(value.get("matched_edges").cloned().unwrap_or_default())
        .map_err(|e| Error::MalformedPatch(format!("matched_edges: {e}")))?;
    let dual = crate::geometry::dual_graph(&crate::geometry::add_diagonals(&patch)?);
    let m = DimerConfig::from_face_pairs(&dual, &pairs)?;
    Ok((dual, m))
}

/// Geometric fingerprint of a quadri-tiling, comparable across different patches.
pub fn tiling_key(dual: &IsoradialDual, m: &DimerConfig) -> Vec<[(i64, i64); 6]> {
    let mut key: Vec<[(i64, i64); 6]> = matching_to_tiling(dual, m)
        .iter()
        .map(|t| {
            let mut a = t.triangles[0].map(point_key);
            let mut b = t.triangles[1].map(point_key);
            a.sort_unstable();
            b.sort_unstable();
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            [a[0], a[1], a[2], b[0], b[1], b[2]]
        })
        .collect();
    key.sort_unstable();
    key
}
