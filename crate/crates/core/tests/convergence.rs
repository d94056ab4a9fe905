use isodimer::geometry::{add_diagonals, build_patch, dual_graph, torus_quotient, EdgeKind, Point, RegionSpec};
use isodimer::measures::{local_statistic, torus_local_statistic, CylinderQuery};

/// Deviation of a leg-edge marginal on the n-fold torus from its infinite-lattice value.
fn deviations(domain: RegionSpec, lattice: [Point; 2], ns: &[usize]) -> Vec<f64> {
    let tri = add_diagonals(&build_patch(&domain).unwrap()).unwrap();
    let d = dual_graph(&tri);
    let leg = (0..d.edges.len()).find(|&e| d.edges[e].kind == EdgeKind::Leg).unwrap();
    let limit = local_statistic(&d, &CylinderQuery::new(vec![leg])).unwrap().value;
    ns.iter()
        .map(|&n| {
            let t = torus_quotient(&tri, lattice, n).unwrap();
            let tw = t.face_index(d.edges[leg].w, (0, 0));
            let e = (0..t.edges.len())
                .find(|&e| {
                    let te = &t.edges[e];
                    te.w == tw && t.faces[te.b].domain_face == d.edges[leg].b && !te.crosses_horizontal && !te.crosses_vertical
                })
                .unwrap();
            (torus_local_statistic(&t, &CylinderQuery::new(vec![e])).unwrap() - limit).abs()
        })
        .collect()
}

#[test]
fn symmetric_torus_is_exact_for_every_n() {
    let dev = deviations(RegionSpec::SquareGrid { m: 2, n: 1 }, [Point::new(4.0, 0.0), Point::new(2.0, 2.0)], &[1, 2, 3]);
    assert!(dev.iter().all(|&x| x < 1e-12), "{dev:?}");
}

#[test]
fn skewed_torus_converges_strictly() {
    let dev = deviations(RegionSpec::SquareGrid { m: 3, n: 1 }, [Point::new(6.0, 0.0), Point::new(2.0, 2.0)], &[1, 2, 3, 4]);
    assert!((dev[0] - 0.1).abs() < 1e-9 && dev[3] < 0.009, "{dev:?}");
    assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
}
