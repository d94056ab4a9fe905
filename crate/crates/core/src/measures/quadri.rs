use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{local_statistic, CylinderQuery, Statistic};
use crate::geometry::{
    ccw_angle, dual_graph, Color, IsoradialDual, PrimalVertex, RhombusPatch, TriangulatedPatch, VertexKind,
};
use crate::{Error, Result};

/// Rhombi of the base tiling that the quadri-tile of dual edge `e` lies in: one when its
/// triangles are glued along a leg, two when glued along the hypotenuse.
pub fn lozenges_of_edge(dual: &IsoradialDual, e: usize) -> Result<Vec<usize>> {
    let edge = dual.edges.get(e).ok_or_else(|| Error::InvalidQuery(format!("edge {e} out of range")))?;
    let mut out: Vec<usize> = [edge.w, edge.b]
        .iter()
        .map(|&f| dual.tri.faces[f].rhombus.ok_or_else(|| Error::InvalidQuery("patch has no rhombus tiling".into())))
        .collect::<Result<_>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// The honeycomb dual of the triangle lattice under a lozenge tiling: every lozenge is split
/// into its two equilateral triangles, rescaled to circumradius 1. Returns the dual and, per
/// lozenge, the honeycomb edge joining its two triangles.
pub fn honeycomb_of(patch: &RhombusPatch) -> Result<(IsoradialDual, Vec<usize>)> {
    let scale = 3f64.sqrt() / 2.0;
    let vertices: Vec<PrimalVertex> = patch
        .vertices
        .iter()
        .map(|v| PrimalVertex { pos: v.pos * scale, color: None, kind: VertexKind::Corner })
        .collect();
    let mut faces = Vec::with_capacity(2 * patch.rhombi.len());
    let mut reference = None;
    for (ri, r) in patch.rhombi.iter().enumerate() {
        let p = r.map(|v| patch.pos(v));
        let angle = ccw_angle(p[1] - p[0], p[3] - p[0]);
        let tris = if (angle - PI / 3.0).abs() < 1e-7 {
            [[r[0], r[1], r[3]], [r[1], r[2], r[3]]]
        } else if (angle - 2.0 * PI / 3.0).abs() < 1e-7 {
            [[r[0], r[1], r[2]], [r[0], r[2], r[3]]]
        } else {
            return Err(Error::InvalidRegion(format!("rhombus {ri} is not a 60-degree lozenge")));
        };
        for t in tris {
            // up and down triangles differ by 60 degrees in their edge directions mod 120
            let phi = (patch.pos(t[1]) - patch.pos(t[0])).arg().rem_euclid(2.0 * PI / 3.0);
            let r0 = *reference.get_or_insert(phi);
            let d = (phi - r0).rem_euclid(2.0 * PI / 3.0);
            let up = d < 1e-6 || (2.0 * PI / 3.0 - d) < 1e-6;
            if !up && (d - PI / 3.0).abs() > 1e-6 {
                return Err(Error::InvalidRegion("lozenges are not on one triangular lattice".into()));
            }
            let color = if up { Color::Black } else { Color::White };
            faces.push((t.to_vec(), color, None));
        }
    }
    let tri = TriangulatedPatch::from_faces(None, vertices, faces)?;
    let dual = dual_graph(&tri);
    let edges = (0..patch.rhombi.len())
        .map(|r| {
            let (a, b) = (2 * r, 2 * r + 1);
            let (w, b) = if dual.vertices[a].color == Color::White { (a, b) } else { (b, a) };
            dual.edge_between(w, b).ok_or_else(|| Error::Geometry(format!("lozenge {r} triangles are not adjacent")))
        })
        .collect::<Result<_>>()?;
    Ok((dual, edges))
}

fn check_connected(patch: &RhombusPatch, lozenges: &BTreeSet<usize>) -> Result<()> {
    let Some(&start) = lozenges.iter().next() else { return Ok(()) };
    let mut neighbors = vec![Vec::new(); patch.rhombi.len()];
    for rs in patch.edge_rhombi() {
        if let [a, b] = rs[..] {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(r) = queue.pop_front() {
        for &s in &neighbors[r] {
            if lozenges.contains(&s) && seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    if seen.len() != lozenges.len() {
        return Err(Error::InvalidQuery(
            "the lozenges of the query edges are not connected; split it into connected cylinders and multiply".into(),
        ));
    }
    Ok(())
}

/// Probability of a connected cylinder of triangular quadri-tilings: the local statistic of
/// the edges in the lozenge-with-diagonals tiling `dual`, times the honeycomb local statistic
/// of the lozenges they lie in.
pub fn quadri_gibbs(dual: &IsoradialDual, query: &CylinderQuery) -> Result<Statistic> {
    let patch = dual.tri.base.as_ref().ok_or_else(|| Error::InvalidQuery("patch has no rhombus tiling".into()))?;
    let mut lozenges = BTreeSet::new();
    for &e in &query.edges {
        lozenges.extend(lozenges_of_edge(dual, e)?);
    }
    check_connected(patch, &lozenges)?;
    let (honeycomb, k) = honeycomb_of(patch)?;
    let outer = local_statistic(dual, query)?;
    let inner = local_statistic(&honeycomb, &CylinderQuery::new(lozenges.iter().map(|&r| k[r]).collect()))?;
    let z = Complex64::new(outer.value, outer.imag) * Complex64::new(inner.value, inner.imag);
    Ok(z.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{add_diagonals, build_patch, EdgeKind, RegionSpec};
    use crate::measures::local_statistic;

    fn hex(a: usize, b: usize, c: usize) -> IsoradialDual {
        dual_graph(&add_diagonals(&build_patch(&RegionSpec::LozengeHexagon { a, b, c }).unwrap()).unwrap())
    }

    fn central_lozenge(d: &IsoradialDual) -> usize {
        let p = d.tri.base.as_ref().unwrap();
        let c = p.vertices.iter().map(|v| v.pos).sum::<Complex64>() / p.vertices.len() as f64;
        (0..p.rhombi.len())
            .min_by(|&a, &b| {
                let m = |r: usize| (p.pos(p.rhombi[r][0]) + p.pos(p.rhombi[r][2])) / 2.0 - c;
                m(a).norm().total_cmp(&m(b).norm())
            })
            .unwrap()
    }

    #[test]
    fn honeycomb_structure() {
        let d = hex(2, 2, 2);
        let (h, k) = honeycomb_of(d.tri.base.as_ref().unwrap()).unwrap();
        assert_eq!(h.len(), 24);
        assert_eq!(k.len(), 12);
        assert!(h.edges.iter().all(|e| (e.nu - 3f64.sqrt()).abs() < 1e-9));
    }

    #[test]
    fn single_leg_tile() {
        let d = hex(3, 3, 3);
        let r = central_lozenge(&d);
        let e = (0..d.edges.len())
            .find(|&e| d.edges[e].kind == EdgeKind::Leg && lozenges_of_edge(&d, e).unwrap() == vec![r] && (d.edges[e].nu - 3f64.sqrt()).abs() < 1e-9)
            .unwrap();
        let q = CylinderQuery::new(vec![e]);
        let mu = quadri_gibbs(&d, &q).unwrap();
        let outer = local_statistic(&d, &q).unwrap();
        assert!((mu.value - outer.value / 3.0).abs() < 1e-10);
        assert!(mu.imag.abs() < 1e-9);
    }

    #[test]
    fn disconnected_and_empty() {
        let d = hex(3, 3, 3);
        assert_eq!(quadri_gibbs(&d, &CylinderQuery::default()).unwrap().value, 1.0);
        let p = d.tri.base.as_ref().unwrap();
        let a = central_lozenge(&d);
        let far = (0..p.rhombi.len()).max_by(|&x, &y| {
            let m = |r: usize| (p.pos(p.rhombi[r][0]) - p.pos(p.rhombi[a][0])).norm();
            m(x).total_cmp(&m(y))
        });
        let leg_in = |r: usize| (0..d.edges.len()).find(|&e| lozenges_of_edge(&d, e).unwrap() == vec![r]).unwrap();
        let q = CylinderQuery::new(vec![leg_in(a), leg_in(far.unwrap())]);
        assert!(matches!(quadri_gibbs(&d, &q), Err(Error::InvalidQuery(_))));
    }

    #[test]
    fn rejects_non_lozenges() {
        let d = dual_graph(&add_diagonals(&build_patch(&RegionSpec::SquareGrid { m: 1, n: 1 }).unwrap()).unwrap());
        assert!(honeycomb_of(d.tri.base.as_ref().unwrap()).is_err());
    }
}
