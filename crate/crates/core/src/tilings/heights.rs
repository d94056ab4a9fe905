use std::collections::VecDeque;
use std::f64::consts::PI;

use super::DimerConfig;
use crate::geometry::{IsoradialDual, RhombusPatch, VertexKind};
use crate::{Error, Result};

/// Integer heights on primal vertices, normalized to 0 at `base_vertex`.
///
/// Indices follow the triangulated patch: rhombus corners first, then one center per rhombus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightField {
    pub base_vertex: usize,
    pub values: Vec<i64>,
}

/// Spreads values from `base` along `steps` (tail, head, increment); reports the first
/// inconsistent edge.
fn integrate(n: usize, base: usize, steps: &[(usize, usize, i64)]) -> std::result::Result<Vec<i64>, (usize, usize)> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, d) in steps {
        adj[u].push((v, d));
        adj[v].push((u, -d));
    }
    let mut h: Vec<Option<i64>> = vec![None; n];
    h[base] = Some(0);
    let mut queue = VecDeque::from([base]);
    while let Some(u) = queue.pop_front() {
        let hu = h[u].unwrap();
        for &(v, d) in &adj[u] {
            match h[v] {
                None => {
                    h[v] = Some(hu + d);
                    queue.push_back(v);
                }
                Some(hv) if hv != hu + d => return Err((u, v)),
                _ => {}
            }
        }
    }
    Ok(h.into_iter().map(|x| x.unwrap_or(0)).collect())
}

pub fn height1(dual: &IsoradialDual, m: &DimerConfig, base: usize) -> Result<HeightField> {
    m.validate(dual)?;
    let tri = &dual.tri;
    if base >= tri.vertices.len() || tri.vertices[base].kind != VertexKind::Corner {
        return Err(Error::InvalidHeight(format!("base vertex {base} is not a rhombus corner")));
    }
    if let Some(p) = &tri.base {
        if !p.simply_connected() {
            let cycle = p.boundary_cycles().get(1).cloned().unwrap_or_default();
            return Err(Error::NotSimplyConnected(format!("hole bounded by vertices {cycle:?}")));
        }
    }
    let steps: Vec<(usize, usize, i64)> = (0..tri.edges.len())
        .map(|e| {
            let (u, v) = tri.oriented(e);
            let inside = dual.edge_of_primal(e).is_some_and(|d| m.contains(d));
            (u, v, if inside { -2 } else { 1 })
        })
        .collect();
    let values = integrate(tri.vertices.len(), base, &steps)
        .map_err(|(u, v)| Error::NotSimplyConnected(format!("height monodromy around a cycle through edge {u}-{v}")))?;
    Ok(HeightField { base_vertex: base, values })
}

pub fn tiling_from_height1(h: &HeightField, dual: &IsoradialDual) -> Result<DimerConfig> {
    let tri = &dual.tri;
    if h.values.len() != tri.vertices.len() || h.values.get(h.base_vertex) != Some(&0) {
        return Err(Error::InvalidHeight("field does not match the patch or is not normalized".into()));
    }
    let mut matched = Vec::new();
    for e in 0..tri.edges.len() {
        let (u, v) = tri.oriented(e);
        match h.values[v] - h.values[u] {
            1 => {}
            -2 => match dual.edge_of_primal(e) {
                Some(d) => matched.push(d),
                None => return Err(Error::InvalidHeight(format!("boundary edge {u}->{v} steps by -2"))),
            },
            d => return Err(Error::InvalidHeight(format!("edge {u}->{v} steps by {d}"))),
        }
    }
    let m = DimerConfig::new(matched);
    m.validate(dual).map_err(|e| Error::InvalidHeight(e.to_string()))?;
    Ok(m)
}

/// Thurston height of a lozenge tiling of the side-2 triangular lattice, with up triangles
/// oriented counterclockwise. Lozenge centers get one more than their lowest corner.
pub fn height2(patch: &RhombusPatch, base: usize) -> Result<HeightField> {
    if !patch.simply_connected() {
        return Err(Error::NotSimplyConnected("lozenge region has holes".into()));
    }
    let n = patch.vertices.len();
    if base >= n {
        return Err(Error::InvalidHeight(format!("base vertex {base} out of range")));
    }
    let mut steps = Vec::with_capacity(patch.edges().len());
    for &(a, b) in patch.edges() {
        let d = patch.pos(b) - patch.pos(a);
        let k = d.arg() / (PI / 3.0);
        if (k - k.round()).abs() > 1e-7 {
            return Err(Error::InvalidTiling(format!("edge {a}-{b} is not a triangular-lattice edge")));
        }
        let k = (k.round() as i64).rem_euclid(6);
        steps.push((a, b, if k % 2 == 0 { 1 } else { -1 }));
    }
    let mut values = integrate(n, base, &steps)
        .map_err(|(u, v)| Error::NotSimplyConnected(format!("monodromy through edge {u}-{v}")))?;
    for r in &patch.rhombi {
        let low = r.iter().map(|&v| values[v]).min().unwrap();
        values.push(low + 1);
    }
    Ok(HeightField { base_vertex: base, values })
}
