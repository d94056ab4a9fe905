//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isodimer::dirac::{
    asymptotic_angles, asymptotic_inverse_dirac, clockwise_odd_orientation, dirac_matrix, inverse_dirac, inverse_dirac_column,
    path_function, real_dirac_matrix, real_path_function, Method, RVertex,
};
use isodimer::geometry::{
    add_diagonals, build_patch, dual_graph, point_key, torus_quotient, triangle_lattice_patch, Color, EdgeKind, IsoradialDual,
    Point, RegionSpec, RhombusPatch, TorusGraph,
};
use isodimer::measures::{
    asymptotic_local_statistic, boltzmann_probability, local_statistic, real_local_statistic, torus_local_statistic,
    BoltzmannMethod, CylinderQuery, TorusKasteleynSet,
};
use isodimer::tilings::{
    apply_move, elementary_moves, enumerate_matchings, for_each_matching, height1, initial_config, tiling_from_height1,
    tiling_key, MoveKind,
};
use isodimer::traintracks::{
    boundary_vectors, complete_to_convex, embed_in_periodic, exterior_angle, make_track_convex, periodic_embedding,
    tiling_report, total_turning, track_boundary_crossings, train_tracks, turning_angle, zonogon_tiling,
};
use isodimer::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn dual_of(spec: RegionSpec) -> IsoradialDual {
    dual_graph(&add_diagonals(&build_patch(&spec).unwrap()).unwrap())
}

fn patch_of_quads(quads: &[[Point; 4]]) -> RhombusPatch {
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut points = Vec::new();
    let rhombi = quads
        .iter()
        .map(|q| {
            q.map(|p| {
                *index.entry(point_key(p)).or_insert_with(|| {
                    points.push(p);
                    points.len() - 1
                })
            })
        })
        .collect();
    RhombusPatch::from_geometry(points, rhombi).unwrap()
}

fn quads_of(p: &RhombusPatch, rhombi: impl IntoIterator<Item = usize>) -> Vec<[Point; 4]> {
    rhombi.into_iter().map(|r| p.rhombi[r].map(|v| p.pos(v))).collect()
}

fn center_keys(p: &RhombusPatch) -> BTreeSet<(i64, i64)> {
    p.rhombi.iter().map(|r| point_key((p.pos(r[0]) + p.pos(r[2])) / 2.0)).collect()
}

fn nearest(d: &IsoradialDual, color: Color, p: Point) -> usize {
    (0..d.len())
        .filter(|&f| d.vertices[f].color == color)
        .min_by(|&a, &b| (d.vertices[a].pos - p).norm().total_cmp(&(d.vertices[b].pos - p).norm()))
        .unwrap()
}

fn criterion_1() -> Outcome {
    let mut patches: Vec<(String, RhombusPatch)> = Vec::new();
    for k in 1..=5 {
        let a = k as f64 * PI / 12.0;
        patches.push((format!("rhombus {a:.3}"), build_patch(&RegionSpec::SingleRhombus { half_angle: a }).unwrap()));
    }
    patches.push(("hexagon(1,1,1)".into(), build_patch(&RegionSpec::LozengeHexagon { a: 1, b: 1, c: 1 }).unwrap()));
    let sq = |i: f64, j: f64| {
        let o = Point::new(2.0 * i, 2.0 * j);
        [o, o + Point::new(2.0, 0.0), o + Point::new(2.0, 2.0), o + Point::new(0.0, 2.0)]
    };
    let cells = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
    // sub-patches of the 2×2 grid with at most 14 dual vertices, i.e. at most 3 squares
    for mask in 1u32..16 {
        let chosen: Vec<[Point; 4]> = (0..4).filter(|i| mask >> i & 1 == 1).map(|i| sq(cells[i].0, cells[i].1)).collect();
        if chosen.len() > 3 || (chosen.len() == 2 && (mask == 0b1001 || mask == 0b0110)) {
            continue;
        }
        patches.push((format!("square cells {mask:04b}"), patch_of_quads(&chosen)));
    }
    let mut worst: f64 = 0.0;
    let mut queries = 0;
    for (name, p) in &patches {
        let d = dual_graph(&add_diagonals(p).unwrap());
        assert!(d.len() <= 14, "{name}");
        let w = d.weights();
        let m = d.edges.len();
        for e in 0..m {
            for f in e..m {
                let q = CylinderQuery::new(if e == f { vec![e] } else { vec![e, f] });
                let a = boltzmann_probability(&d, &w, &q, BoltzmannMethod::Determinant).unwrap();
                let b = boltzmann_probability(&d, &w, &q, BoltzmannMethod::Enumerate).unwrap();
                worst = worst.max((a - b).abs());
                queries += 1;
            }
        }
    }
    outcome(worst <= 1e-10, format!("{} patches, {queries} queries, max |det - enum| = {worst:.2e}", patches.len()))
}

fn torus_enumeration(t: &TorusGraph) -> f64 {
    let pairs: Vec<(usize, usize)> = t.edges.iter().map(|e| (e.w, e.b)).collect();
    let mut z = 0.0;
    for_each_matching(t.len(), &pairs, |m| z += m.iter().map(|&e| t.edges[e].nu).product::<f64>());
    z
}

fn criterion_2() -> Outcome {
    let honeycomb =
        torus_quotient(&triangle_lattice_patch(1, 1).unwrap(), [Point::new(3f64.sqrt(), 0.0), Point::new(3f64.sqrt() / 2.0, 1.5)], 1)
            .unwrap();
    let square = torus_quotient(
        &add_diagonals(&build_patch(&RegionSpec::SquareGrid { m: 2, n: 1 }).unwrap()).unwrap(),
        [Point::new(4.0, 0.0), Point::new(2.0, 2.0)],
        1,
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, t) in [("honeycomb", &honeycomb), ("square-with-diagonals", &square)] {
        let d = TorusKasteleynSet::new(t).unwrap().dets;
        let formula = (-d[0] + d[1] + d[2] + d[3]) / 2.0;
        let z = torus_enumeration(t);
        let rel = (formula - z).abs() / z;
        worst = worst.max(rel);
        parts.push(format!("{name} Z={z:.6} rel {rel:.1e}"));
    }
    outcome(worst <= 1e-9, parts.join(", "))
}

fn criterion_3() -> Outcome {
    let d = dual_of(RegionSpec::SquareGrid { m: 10, n: 10 });
    let k = dirac_matrix(&d);
    // faces of the 5×5 block of squares in the middle of a 10×10 grid, located by square centers
    let inside = |p: Point| (4.0..14.0).contains(&p.re) && (4.0..14.0).contains(&p.im);
    let center = |f: usize| d.tri.vertices[d.tri.faces[f].verts[2]].pos;
    let window: Vec<usize> = d.whites().into_iter().filter(|&w| inside(center(w))).collect();
    let mut worst: f64 = 0.0;
    for &w in &window {
        let col = inverse_dirac_column(&d, w, Method::Residues).unwrap();
        for &w0 in &window {
            let s: Complex64 = d.incident(w0).iter().map(|&e| k.values[e] * col[d.edges[e].b].unwrap()).sum();
            let target = if w0 == w { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    outcome(worst < 1e-8 && window.len() == 50, format!("{} white faces, max |K K^-1 - I| = {worst:.2e}", window.len()))
}

fn criterion_4() -> Outcome {
    let d = dual_graph(&triangle_lattice_patch(4, 4).unwrap());
    let k = dirac_matrix(&d);
    let mut worst: f64 = 0.0;
    for (i, e) in d.edges.iter().enumerate() {
        let inv = inverse_dirac(&d, e.b, e.w, Method::Residues).unwrap().value;
        worst = worst.max((k.values[i] * inv - 1.0 / 3.0).norm());
    }
    outcome(worst <= 1e-9, format!("{} edges, max |P - 1/3| = {worst:.2e}", d.edges.len()))
}

fn torus_leg_deviation(domain: RegionSpec, lattice: [Point; 2], ns: &[usize]) -> Vec<f64> {
    let tri = add_diagonals(&build_patch(&domain).unwrap()).unwrap();
    let d = dual_graph(&tri);
    let leg = (0..d.edges.len()).find(|&e| d.edges[e].kind == EdgeKind::Leg).unwrap();
    let infinite = local_statistic(&d, &CylinderQuery::new(vec![leg])).unwrap().value;
    ns.iter()
        .map(|&n| {
            let t = torus_quotient(&tri, lattice, n).unwrap();
            let (w, b) = (d.edges[leg].w, d.edges[leg].b);
            let tw = t.face_index(w, (0, 0));
            let e = (0..t.edges.len())
                .find(|&e| t.edges[e].w == tw && t.faces[t.edges[e].b].domain_face == b && !t.edges[e].crosses_horizontal && !t.edges[e].crosses_vertical)
                .unwrap();
            (torus_local_statistic(&t, &CylinderQuery::new(vec![e])).unwrap() - infinite).abs()
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let dev = torus_leg_deviation(RegionSpec::SquareGrid { m: 2, n: 1 }, [Point::new(4.0, 0.0), Point::new(2.0, 2.0)], &[2, 4, 6]);
    // non-increasing up to rounding; on this torus the leg marginal is exact for every n
    let monotone = dev.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    outcome(monotone && dev[2] < 1e-3, format!("n=2,4,6 deviations {:.2e} {:.2e} {:.2e}", dev[0], dev[1], dev[2]))
}

fn criterion_6() -> Outcome {
    let d = dual_of(RegionSpec::SquareGrid { m: 20, n: 4 });
    let w = nearest(&d, Color::White, Point::new(4.0, 4.0));
    let b0 = nearest(&d, Color::Black, d.vertices[w].pos + Point::new(1.0, 0.3));
    let (t1, t2) = asymptotic_angles(&d, w, b0).unwrap();
    let col = inverse_dirac_column(&d, w, Method::Residues).unwrap();
    let mut samples = Vec::new();
    for k in 0.. {
        let target = d.vertices[b0].pos + Point::new(4.0 * k as f64, 0.0);
        let r = (target - d.vertices[w].pos).norm();
        if r > 30.0 {
            break;
        }
        if r < 5.0 {
            continue;
        }
        let b = nearest(&d, Color::Black, target);
        assert!((d.vertices[b].pos - target).norm() < 1e-9);
        assert_eq!(asymptotic_angles(&d, w, b).unwrap(), (t1, t2));
        let asy = asymptotic_inverse_dirac(d.vertices[b].pos, d.vertices[w].pos, t1, t2).unwrap();
        samples.push((r, (col[b].unwrap() - asy).norm() * r.powi(3)));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let max = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    outcome(
        slope <= 0.1,
        format!("{} radii in [{:.1}, {:.1}], slope {slope:.3}, max err*r^3 {max:.3}", samples.len(), samples[0].0, samples.last().unwrap().0),
    )
}

fn leg_near(d: &IsoradialDual, target: Point) -> usize {
    (0..d.edges.len())
        .filter(|&e| d.edges[e].kind == EdgeKind::Leg)
        .min_by(|&a, &b| (d.vertices[d.edges[a].w].pos - target).norm().total_cmp(&(d.vertices[d.edges[b].w].pos - target).norm()))
        .unwrap()
}

fn edge_at(d: &IsoradialDual, w: Point, b: Point) -> usize {
    (0..d.edges.len())
        .find(|&e| (d.vertices[d.edges[e].w].pos - w).norm() < 1e-6 && (d.vertices[d.edges[e].b].pos - b).norm() < 1e-6)
        .unwrap()
}

fn rhombi_near(d: &IsoradialDual, p: Point, r: f64) -> BTreeSet<(i64, i64)> {
    let base = d.tri.base.as_ref().unwrap();
    base.rhombi
        .iter()
        .map(|q| (base.pos(q[0]) + base.pos(q[2])) / 2.0)
        .filter(|c| (c - p).norm() < r)
        .map(point_key)
        .collect()
}

fn criterion_7() -> Outcome {
    let a = dual_of(RegionSpec::LozengeHexagon { a: 7, b: 7, c: 7 });
    let c = a.vertices.iter().map(|v| v.pos).sum::<Point>() / a.len() as f64;
    let (e1, e2) = (leg_near(&a, c - 11.0), leg_near(&a, c + 11.0));
    let ends = |d: &IsoradialDual, e: usize| (d.vertices[d.edges[e].w].pos, d.vertices[d.edges[e].b].pos);
    let ((w1, b1), (w2, b2)) = (ends(&a, e1), ends(&a, e2));
    let r = ((w1 + b1) / 2.0 - (w2 + b2) / 2.0).norm();
    // second ambient tiling: lozenge flips around the middle, away from both edges
    let (mut b, mut m) = (a.clone(), initial_config(&a).unwrap());
    let mut flips = 0;
    while flips < 40 {
        let far = elementary_moves(&b, &m).into_iter().find(|mv| {
            mv.kind == MoveKind::LozengeFlip && {
                let p = b.tri.base.as_ref().unwrap().pos(mv.support[0]);
                (p - w1).norm() > 5.0 && (p - w2).norm() > 5.0 && (p - c).norm() < 8.0
            }
        });
        let Some(mv) = far else { break };
        let (nb, nm) = apply_move(&b, &m, &mv).unwrap();
        b = nb.unwrap();
        m = nm;
        flips += 1;
    }
    let distinct = center_keys(a.tri.base.as_ref().unwrap()) != center_keys(b.tri.base.as_ref().unwrap());
    let shared = [w1, w2].iter().all(|&p| rhombi_near(&a, p, 3.0) == rhombi_near(&b, p, 3.0));
    let qa = CylinderQuery::new(vec![e1, e2]);
    let qb = CylinderQuery::new(vec![edge_at(&b, w1, b1), edge_at(&b, w2, b2)]);
    let asy = (asymptotic_local_statistic(&a, &qa).unwrap().value - asymptotic_local_statistic(&b, &qb).unwrap().value).abs();
    let exact = (local_statistic(&a, &qa).unwrap().value - local_statistic(&b, &qb).unwrap().value).abs();
    outcome(
        distinct && shared && r >= 20.0 && asy <= 1e-12 && exact < 5e-4,
        format!("r = {r:.2}, {flips} flips, asymptotic diff {asy:.1e}, exact diff {exact:.1e}"),
    )
}

fn criterion_8() -> Outcome {
    let mut specs: Vec<RegionSpec> = (1..=5).map(|k| RegionSpec::SingleRhombus { half_angle: k as f64 * PI / 12.0 }).collect();
    specs.extend([
        RegionSpec::LozengeHexagon { a: 1, b: 1, c: 1 },
        RegionSpec::LozengeHexagon { a: 1, b: 1, c: 2 },
        RegionSpec::LozengeHexagon { a: 1, b: 2, c: 2 },
        RegionSpec::SquareGrid { m: 2, n: 2 },
        RegionSpec::SquareGrid { m: 3, n: 2 },
        RegionSpec::SquareGrid { m: 4, n: 2 },
    ]);
    let mut patches: Vec<RhombusPatch> = specs.iter().map(|s| build_patch(s).unwrap()).collect();
    patches.push(zonogon_tiling(&[0.1, 0.9, 1.7, 2.6]).unwrap());
    let (mut total, mut bad) = (0, 0);
    for p in &patches {
        assert!(p.rhombi.len() <= 8);
        let d = dual_graph(&add_diagonals(p).unwrap());
        let all = enumerate_matchings(&d);
        let mut fields = BTreeSet::new();
        for m in &all {
            let h = height1(&d, m, 0).unwrap();
            if &tiling_from_height1(&h, &d).unwrap() != m {
                bad += 1;
            }
            fields.insert(h.values);
        }
        // distinct matchings must give distinct height functions
        bad += all.len() - fields.len();
        total += all.len();
    }
    outcome(bad == 0, format!("{} patches, {total} matchings, {bad} mismatches", patches.len()))
}

/// Every quadri-tiling reachable by moves from the canonical one, and the union of all
/// matchings over every lozenge tiling of the region.
fn orbit_and_enumeration(d: &IsoradialDual) -> (BTreeSet<Vec<[(i64, i64); 6]>>, BTreeSet<Vec<[(i64, i64); 6]>>) {
    let start = initial_config(d).unwrap();
    let mut orbit = BTreeSet::from([tiling_key(d, &start)]);
    let mut queue = VecDeque::from([(d.clone(), start)]);
    while let Some((g, m)) = queue.pop_front() {
        for mv in elementary_moves(&g, &m) {
            let (ng, nm) = apply_move(&g, &m, &mv).unwrap();
            let ng = ng.unwrap_or_else(|| g.clone());
            if orbit.insert(tiling_key(&ng, &nm)) {
                queue.push_back((ng, nm));
            }
        }
    }
    let mut all = BTreeSet::new();
    let mut done = BTreeSet::new();
    let mut frontier = vec![d.clone()];
    while let Some(g) = frontier.pop() {
        if !done.insert(center_keys(g.tri.base.as_ref().unwrap())) {
            continue;
        }
        for m in enumerate_matchings(&g) {
            all.insert(tiling_key(&g, &m));
        }
        let m = initial_config(&g).unwrap();
        for mv in elementary_moves(&g, &m).into_iter().filter(|mv| mv.kind == MoveKind::LozengeFlip) {
            frontier.push(apply_move(&g, &m, &mv).unwrap().0.unwrap());
        }
    }
    (orbit, all)
}

fn criterion_9() -> Outcome {
    let s3 = 3f64.sqrt();
    let (u, v, w) = (Point::new(2.0, 0.0), Point::new(1.0, s3), Point::new(-1.0, s3));
    let o = Point::new(0.0, 0.0);
    let two = patch_of_quads(&[[o, u, u + v, v], [v, u + v, u + v + w, v + w]]);
    let mut regions: Vec<(String, IsoradialDual)> = vec![
        ("lozenge".into(), dual_of(RegionSpec::SingleRhombus { half_angle: PI / 3.0 })),
        ("two lozenges".into(), dual_graph(&add_diagonals(&two).unwrap())),
        ("hexagon(1,1,1)".into(), dual_of(RegionSpec::LozengeHexagon { a: 1, b: 1, c: 1 })),
        ("hexagon(1,1,2)".into(), dual_of(RegionSpec::LozengeHexagon { a: 1, b: 1, c: 2 })),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, d) in regions.drain(..) {
        let (orbit, all) = orbit_and_enumeration(&d);
        pass &= all.len() <= 500 && orbit == all;
        parts.push(format!("{name}: {}/{}", orbit.len(), all.len()));
    }
    outcome(pass, format!("orbit/enumerated {}", parts.join(", ")))
}

fn is_convex(p: &RhombusPatch) -> bool {
    let e = boundary_vectors(p);
    (0..e.len()).all(|i| exterior_angle(e[i], e[(i + 1) % e.len()]) >= -1e-9)
}

/// Checks the invariants of both completion stages and the final tiling.
fn pipeline(p: &RhombusPatch, ambient: &RhombusPatch) -> Result<String, String> {
    if is_convex(p) {
        return Err("input is convex".into());
    }
    let convex = make_track_convex(p, ambient).map_err(|e| e.to_string())?;
    let crossings = track_boundary_crossings(&convex, ambient).map_err(|e| e.to_string())?;
    // every ambient track meeting the patch enters and leaves it once
    if crossings.iter().any(|&c| c != 2) {
        return Err(format!("track crossings after the first stage: {crossings:?}"));
    }
    let z = complete_to_convex(&convex).map_err(|e| e.to_string())?;
    let (domain, lattice) = periodic_embedding(&z).map_err(|e| e.to_string())?;
    let (direct, direct_lattice) = embed_in_periodic(p, ambient).map_err(|e| e.to_string())?;
    if center_keys(&direct) != center_keys(&domain) || direct_lattice != lattice {
        return Err("embed_in_periodic differs from the staged construction".into());
    }
    let stages = [p, &convex, &z.patch, &domain];
    for w in stages.windows(2) {
        if !center_keys(w[0]).is_subset(&center_keys(w[1])) {
            return Err("a stage removed rhombi".into());
        }
        if w[0].vertices.iter().zip(&w[1].vertices).any(|(a, b)| a != b) {
            return Err("a stage moved or renumbered vertices".into());
        }
    }
    // convex zonogon: positive turning between direction changes, one full turn
    let e = z.edge_vectors();
    let m = e.len();
    for i in 0..m {
        let a = exterior_angle(e[i], e[(i + 1) % m]);
        let parallel = (e[i] - e[(i + 1) % m]).norm() < 1e-9;
        if a < 0.0 || (!parallel && a <= 0.0) || (parallel && a.abs() > 1e-12) {
            return Err(format!("turning angle {a} at boundary vertex {i}"));
        }
    }
    if (total_turning(&e) - 2.0 * PI).abs() > 1e-9 {
        return Err("total turning is not 2 pi".into());
    }
    // every track joins opposite boundary edges, turning by pi between its ends
    let tracks = train_tracks(&z.patch);
    let index_of = |edge: usize| {
        let (a, b) = z.patch.edges()[edge];
        z.boundary.iter().position(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)).unwrap()
    };
    for t in &tracks {
        let (i, j) = (index_of(t.edges[0]), index_of(*t.edges.last().unwrap()));
        let angle = turning_angle(&e, i, j).map_err(|e| e.to_string())?;
        if (angle - PI).abs() > 1e-9 || (j + m - i) % m != m / 2 {
            return Err(format!("track ends at edges {i}, {j} turn by {angle}"));
        }
    }
    // non-parallel tracks cross exactly once, parallel ones never
    let mut pairs = 0;
    let mut non_parallel = 0;
    for (a, ta) in tracks.iter().enumerate() {
        for tb in &tracks[a + 1..] {
            let shared = ta.rhombi.iter().filter(|r| tb.rhombi.contains(r)).count();
            let expected = usize::from(!ta.parallel_to(tb));
            if shared != expected {
                return Err(format!("two tracks share {shared} rhombi"));
            }
            pairs += shared;
            non_parallel += expected;
        }
    }
    let groups = z.directions();
    let by_groups: usize = (0..groups.len()).flat_map(|i| (i + 1..groups.len()).map(move |j| (i, j))).map(|(i, j)| groups[i].1 * groups[j].1).sum();
    if pairs != non_parallel || pairs != by_groups || tracks.len() != z.half() {
        return Err(format!("{pairs} crossings for {} tracks", tracks.len()));
    }
    let rep = tiling_report(&domain, lattice);
    if !rep.passes(1e-6) {
        return Err(format!("tiling report {rep:?}"));
    }
    Ok(format!(
        "{}->{}->{}->{} rhombi, overlap {:.1e}, coverage-1 {:.1e}",
        p.rhombi.len(),
        convex.rhombi.len(),
        z.patch.rhombi.len(),
        domain.rhombi.len(),
        rep.overlap,
        rep.coverage - 1.0
    ))
}

fn criterion_10() -> Outcome {
    let mut cases: Vec<(String, RhombusPatch, RhombusPatch)> = Vec::new();
    let track_union = |amb: &RhombusPatch, ts: &[usize]| -> RhombusPatch {
        let tracks = train_tracks(amb);
        let rs: BTreeSet<usize> = ts.iter().flat_map(|&t| tracks[t].rhombi.iter().copied()).collect();
        patch_of_quads(&quads_of(amb, rs))
    };
    let z5 = zonogon_tiling(&[0.1, 0.8, 1.5, 2.1, 2.8]).unwrap();
    cases.push(("two crossing tracks, 5 directions".into(), track_union(&z5, &[1, 3]), z5));
    let z6 = zonogon_tiling(&[0.05, 0.6, 1.2, 1.7, 2.3, 2.9]).unwrap();
    cases.push(("single track, 6 directions".into(), track_union(&z6, &[2]), z6.clone()));
    cases.push(("two crossing tracks, 6 directions".into(), track_union(&z6, &[1, 3]), z6));
    let hex = build_patch(&RegionSpec::LozengeHexagon { a: 3, b: 3, c: 3 }).unwrap();
    let s3 = 3f64.sqrt();
    let (u, v, w) = (Point::new(2.0, 0.0), Point::new(1.0, s3), Point::new(-1.0, s3));
    let keys = center_keys(&hex);
    let l_at = |o: Point| [[o, o + u, o + u + v, o + v], [o + v, o + u + v, o + u + v + w, o + v + w]];
    let l = hex
        .vertices
        .iter()
        .map(|x| l_at(x.pos))
        .find(|l| l.iter().all(|q| keys.contains(&point_key((q[0] + q[2]) / 2.0))))
        .expect("the hexagon contains an L of two lozenges");
    cases.push(("L of two lozenges in hexagon(3,3,3)".into(), patch_of_quads(&l), hex));
    let z7 = zonogon_tiling(&[0.2, 0.6, 1.0, 1.4, 1.9, 2.4, 2.9]).unwrap();
    let tracks = train_tracks(&z7);
    let run = tracks[3].rhombi[1..5].to_vec();
    cases.push(("four rhombi of one track, 7 directions".into(), patch_of_quads(&quads_of(&z7, run)), z7));

    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p, amb) in &cases {
        match pipeline(p, amb) {
            Ok(s) => parts.push(format!("{name}: {s}")),
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: FAILED {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let duals = [dual_of(RegionSpec::LozengeHexagon { a: 2, b: 2, c: 2 }), dual_of(RegionSpec::SquareGrid { m: 3, n: 3 })];
    let (mut statistic_err, mut identity_err): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let d = &duals[i % 2];
        let o = clockwise_odd_orientation(d).unwrap();
        // cylinder sets of up to three edges with distinct endpoints
        let k = rng.gen_range(1..=3);
        let mut edges: Vec<usize> = Vec::new();
        while edges.len() < k {
            let e = rng.gen_range(0..d.edges.len());
            if edges.iter().all(|&f| d.edges[f].w != d.edges[e].w && d.edges[f].b != d.edges[e].b) {
                edges.push(e);
            }
        }
        let q = CylinderQuery::new(edges.clone());
        let a = local_statistic(d, &q).unwrap();
        let b = real_local_statistic(d, &o, &q).unwrap();
        statistic_err = statistic_err.max((a.value - b.value).abs()).max((a.imag - b.imag).abs());
        // real and complex path functions and operator entries
        let kk = real_dirac_matrix(d, &o);
        let kc = dirac_matrix(d);
        for &e in &edges {
            let edge = &d.edges[e];
            let f0 = real_path_function(d, &o, edge.w, edge.b, None).unwrap().eval(Complex64::new(0.0, 0.0));
            identity_err = identity_err.max((kk.values[e] - f0 * kc.values[e]).norm());
        }
        let whites = d.whites();
        let w = whites[rng.gen_range(0..whites.len())];
        let x = rng.gen_range(0..d.len());
        let real = real_path_function(d, &o, w, x, None).unwrap();
        let complex = path_function(d, w, RVertex::Dual(x), None).unwrap();
        let z = Complex64::from_polar(rng.gen_range(0.1..3.0), rng.gen_range(-PI..PI));
        let lhs = real.eval(z);
        let rhs = real.eval(Complex64::new(0.0, 0.0)).conj() * complex.eval(z);
        identity_err = identity_err.max((lhs - rhs).norm() / rhs.norm().max(1.0));
    }
    outcome(statistic_err <= 1e-9 && identity_err <= 1e-9, format!("100 queries, real vs complex statistic {statistic_err:.1e}, path/entry identities {identity_err:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 11] = [
        ("determinant ratios match enumeration", criterion_1, Duration::from_secs(10)),
        ("torus partition function identity at n = 1", criterion_2, Duration::from_secs(5)),
        ("K K^-1 = I on a 5x5 window", criterion_3, Duration::from_secs(30)),
        ("honeycomb edge probability 1/3", criterion_4, Duration::MAX),
        ("torus marginals converge", criterion_5, Duration::from_secs(120)),
        ("far-field error is cubic", criterion_6, Duration::MAX),
        ("locality of two-edge statistics", criterion_7, Duration::MAX),
        ("height function round trip", criterion_8, Duration::MAX),
        ("move orbit equals enumeration", criterion_9, Duration::MAX),
        ("periodic embedding pipeline", criterion_10, Duration::MAX),
        ("real and complex formulas agree", criterion_11, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let pass = out.pass && took <= *budget;
        failed += usize::from(!pass);
        println!(
            "{} criterion {}: {name} ({}; {:.2}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
