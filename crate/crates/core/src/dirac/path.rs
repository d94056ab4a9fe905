use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use super::Orientation;
use crate::geometry::{Color, IsoradialDual};
use crate::{Error, Result};

/// Angles closer than this are the same root.
pub const ROOT_TOL: f64 = 1e-9;

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn same_angle(a: f64, b: f64) -> bool {
    wrap(a - b).abs() < ROOT_TOL
}

/// A pole of a path function: `e^{i angle}` with multiplicity `mult`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pole {
    pub angle: f64,
    pub mult: usize,
}

/// `prefactor * prod (z - e^{i a}) / prod (z - e^{i p})` over numerator and denominator root
/// angles, kept in factored form. Common roots are cancelled as they arise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathFunction {
    pub prefactor: Complex64,
    pub numerator_roots: Vec<f64>,
    pub denominator_roots: Vec<f64>,
}

impl Default for PathFunction {
    fn default() -> Self {
        Self::one()
    }
}

impl PathFunction {
    pub fn one() -> Self {
        PathFunction { prefactor: Complex64::new(1.0, 0.0), numerator_roots: Vec::new(), denominator_roots: Vec::new() }
    }

    /// Multiplies by `z - e^{i angle}`.
    pub fn multiply_root(&mut self, angle: f64) {
        let angle = wrap(angle);
        match self.denominator_roots.iter().position(|&p| same_angle(p, angle)) {
            Some(k) => {
                self.denominator_roots.swap_remove(k);
            }
            None => self.numerator_roots.push(angle),
        }
    }

    /// Divides by `z - e^{i angle}`.
    pub fn divide_root(&mut self, angle: f64) {
        let angle = wrap(angle);
        match self.numerator_roots.iter().position(|&p| same_angle(p, angle)) {
            Some(k) => {
                self.numerator_roots.swap_remove(k);
            }
            None => self.denominator_roots.push(angle),
        }
    }

    pub fn scale(&mut self, c: Complex64) {
        self.prefactor *= c;
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let num: Complex64 = self.numerator_roots.iter().map(|&a| z - Complex64::from_polar(1.0, a)).product();
        let den: Complex64 = self.denominator_roots.iter().map(|&a| z - Complex64::from_polar(1.0, a)).product();
        self.prefactor * num / den
    }

    /// Distinct poles with multiplicities, sorted by angle.
    pub fn poles(&self) -> Vec<Pole> {
        cluster(&self.denominator_roots)
    }

    pub fn zeros(&self) -> Vec<Pole> {
        cluster(&self.numerator_roots)
    }

    /// Equal root multisets and prefactors within `tol`.
    pub fn approx_eq(&self, other: &PathFunction, tol: f64) -> bool {
        (self.prefactor - other.prefactor).norm() <= tol
            && same_multiset(&self.numerator_roots, &other.numerator_roots)
            && same_multiset(&self.denominator_roots, &other.denominator_roots)
    }
}

fn cluster(roots: &[f64]) -> Vec<Pole> {
    let mut out: Vec<Pole> = Vec::new();
    for &r in roots {
        match out.iter_mut().find(|p| same_angle(p.angle, r)) {
            Some(p) => p.mult += 1,
            None => out.push(Pole { angle: r, mult: 1 }),
        }
    }
    out.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    out
}

fn same_multiset(a: &[f64], b: &[f64]) -> bool {
    let (ca, cb) = (cluster(a), cluster(b));
    ca.len() == cb.len() && ca.iter().all(|p| cb.iter().any(|q| same_angle(p.angle, q.angle) && p.mult == q.mult))
}

/// A vertex of the rhombic complex: a primal vertex or a dual vertex (face circumcenter).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RVertex {
    Primal(usize),
    Dual(usize),
}

/// Unit step vector of the rhombic-complex edge between face `f` and primal vertex `u`:
/// away from white faces, towards black ones.
fn step_angle(dual: &IsoradialDual, f: usize, u: usize) -> f64 {
    let d = dual.tri.vertices[u].pos - dual.vertices[f].pos;
    match dual.vertices[f].color {
        Color::White => d.arg(),
        Color::Black => (-d).arg(),
    }
}

fn neighbours(dual: &IsoradialDual, v: RVertex) -> Vec<RVertex> {
    match v {
        RVertex::Dual(f) => dual.tri.faces[f].verts.iter().map(|&u| RVertex::Primal(u)).collect(),
        RVertex::Primal(u) => dual.tri.vertex_faces(u).iter().map(|&f| RVertex::Dual(f)).collect(),
    }
}

fn check_vertex(dual: &IsoradialDual, v: RVertex) -> Result<()> {
    let ok = match v {
        RVertex::Dual(f) => f < dual.len(),
        RVertex::Primal(u) => u < dual.tri.vertices.len(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidQuery(format!("{v:?} is not a vertex of the patch")))
    }
}

/// Applies one step `from -> to` of the rhombic complex to `f`.
fn step(dual: &IsoradialDual, f: &mut PathFunction, from: RVertex, to: RVertex) -> Result<()> {
    let (face, u, outward) = match (from, to) {
        (RVertex::Dual(g), RVertex::Primal(u)) => (g, u, true),
        (RVertex::Primal(u), RVertex::Dual(g)) => (g, u, false),
        _ => return Err(Error::InvalidQuery(format!("{from:?} -> {to:?} is not a rhombic-complex edge"))),
    };
    if !dual.tri.faces[face].verts.contains(&u) {
        return Err(Error::InvalidQuery(format!("{from:?} -> {to:?} is not a rhombic-complex edge")));
    }
    let a = step_angle(dual, face, u);
    // leaving a white face or entering a black one divides
    let divide = match dual.vertices[face].color {
        Color::White => outward,
        Color::Black => !outward,
    };
    if divide {
        f.divide_root(a);
    } else {
        f.multiply_root(a);
    }
    Ok(())
}

/// Breadth-first path in the rhombic complex from white face `w` to `target`.
pub fn default_path(dual: &IsoradialDual, w: usize, target: RVertex) -> Result<Vec<RVertex>> {
    check_vertex(dual, RVertex::Dual(w))?;
    check_vertex(dual, target)?;
    let np = dual.tri.vertices.len();
    let idx = |v: RVertex| match v {
        RVertex::Primal(u) => u,
        RVertex::Dual(f) => np + f,
    };
    let mut parent: Vec<Option<RVertex>> = vec![None; np + dual.len()];
    let start = RVertex::Dual(w);
    parent[idx(start)] = Some(start);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if v == target {
            break;
        }
        for u in neighbours(dual, v) {
            if parent[idx(u)].is_none() {
                parent[idx(u)] = Some(v);
                queue.push_back(u);
            }
        }
    }
    if parent[idx(target)].is_none() {
        return Err(Error::Unreachable(w, idx(target)));
    }
    let mut path = vec![target];
    let mut v = target;
    while v != start {
        v = parent[idx(v)].unwrap();
        path.push(v);
    }
    path.reverse();
    Ok(path)
}

/// `f_{wv}` along `path` (from `w` to `v`), or along the breadth-first path.
pub fn path_function(dual: &IsoradialDual, w: usize, v: RVertex, path: Option<&[RVertex]>) -> Result<PathFunction> {
    check_vertex(dual, RVertex::Dual(w))?;
    if dual.vertices[w].color != Color::White {
        return Err(Error::InvalidQuery(format!("face {w} is not white")));
    }
    let owned;
    let path = match path {
        Some(p) => p,
        None => {
            owned = default_path(dual, w, v)?;
            &owned
        }
    };
    if path.first() != Some(&RVertex::Dual(w)) || path.last() != Some(&v) {
        return Err(Error::InvalidQuery("path does not run from w to v".into()));
    }
    let mut f = PathFunction::one();
    for pair in path.windows(2) {
        step(dual, &mut f, pair[0], pair[1])?;
    }
    Ok(f)
}

/// `f_{wb}` for every dual vertex, from one breadth-first search; `None` when unreachable.
pub fn path_function_table(dual: &IsoradialDual, w: usize) -> Result<Vec<Option<PathFunction>>> {
    check_vertex(dual, RVertex::Dual(w))?;
    if dual.vertices[w].color != Color::White {
        return Err(Error::InvalidQuery(format!("face {w} is not white")));
    }
    let np = dual.tri.vertices.len();
    let mut primal: Vec<Option<PathFunction>> = vec![None; np];
    let mut faces: Vec<Option<PathFunction>> = vec![None; dual.len()];
    faces[w] = Some(PathFunction::one());
    let mut queue = VecDeque::from([RVertex::Dual(w)]);
    while let Some(v) = queue.pop_front() {
        let fv = match v {
            RVertex::Dual(g) => faces[g].clone().unwrap(),
            RVertex::Primal(u) => primal[u].clone().unwrap(),
        };
        for u in neighbours(dual, v) {
            let slot = match u {
                RVertex::Dual(g) => &mut faces[g],
                RVertex::Primal(p) => &mut primal[p],
            };
            if slot.is_none() {
                let mut f = fv.clone();
                step(dual, &mut f, v, u)?;
                *slot = Some(f);
                queue.push_back(u);
            }
        }
    }
    Ok(faces)
}

/// Real path function `𝖿_{wx}` along a dual-graph path from `w` to `x`, with the signs of
/// `orientation`; defaults to a breadth-first path.
pub fn real_path_function(
    dual: &IsoradialDual,
    orientation: &Orientation,
    w: usize,
    x: usize,
    path: Option<&[usize]>,
) -> Result<PathFunction> {
    check_vertex(dual, RVertex::Dual(w))?;
    check_vertex(dual, RVertex::Dual(x))?;
    if dual.vertices[w].color != Color::White {
        return Err(Error::InvalidQuery(format!("face {w} is not white")));
    }
    let owned;
    let path = match path {
        Some(p) => p,
        None => {
            owned = dual_path(dual, w, x)?;
            &owned
        }
    };
    if path.first() != Some(&w) || path.last() != Some(&x) {
        return Err(Error::InvalidQuery("path does not run from w to x".into()));
    }
    let mut f = PathFunction::one();
    for pair in path.windows(2) {
        let e = dual
            .edge_between(pair[0], pair[1])
            .ok_or_else(|| Error::InvalidQuery(format!("faces {} and {} are not adjacent", pair[0], pair[1])))?;
        real_step(dual, orientation, &mut f, e, pair[0]);
    }
    Ok(f)
}

fn real_step(dual: &IsoradialDual, orientation: &Orientation, f: &mut PathFunction, e: usize, from: usize) {
    let d = &dual.edges[e];
    let sign = orientation.sign(e);
    let (a, b) = (d.rhombus.alpha, d.rhombus.beta);
    if from == d.w {
        f.scale(sign * d.direction());
        f.divide_root(a);
        f.divide_root(b);
    } else {
        f.scale(sign * d.direction().conj());
        f.multiply_root(a);
        f.multiply_root(b);
    }
}

/// `𝖿_{wx}` for every dual vertex from one breadth-first search of the dual graph.
pub fn real_path_function_table(dual: &IsoradialDual, orientation: &Orientation, w: usize) -> Result<Vec<Option<PathFunction>>> {
    check_vertex(dual, RVertex::Dual(w))?;
    if dual.vertices[w].color != Color::White {
        return Err(Error::InvalidQuery(format!("face {w} is not white")));
    }
    let mut out: Vec<Option<PathFunction>> = vec![None; dual.len()];
    out[w] = Some(PathFunction::one());
    let mut queue = VecDeque::from([w]);
    while let Some(v) = queue.pop_front() {
        for &e in dual.incident(v) {
            let u = dual.other(e, v);
            if out[u].is_none() {
                let mut f = out[v].clone().unwrap();
                real_step(dual, orientation, &mut f, e, v);
                out[u] = Some(f);
                queue.push_back(u);
            }
        }
    }
    Ok(out)
}

fn dual_path(dual: &IsoradialDual, w: usize, x: usize) -> Result<Vec<usize>> {
    let mut parent = vec![usize::MAX; dual.len()];
    parent[w] = w;
    let mut queue = VecDeque::from([w]);
    while let Some(v) = queue.pop_front() {
        if v == x {
            break;
        }
        for &e in dual.incident(v) {
            let u = dual.other(e, v);
            if parent[u] == usize::MAX {
                parent[u] = v;
                queue.push_back(u);
            }
        }
    }
    if parent[x] == usize::MAX {
        return Err(Error::Unreachable(w, x));
    }
    let mut path = vec![x];
    let mut v = x;
    while v != w {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::clockwise_odd_orientation;
    use crate::geometry::{add_diagonals, build_patch, dual_graph, RegionSpec};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dual_of(spec: RegionSpec) -> IsoradialDual {
        dual_graph(&add_diagonals(&build_patch(&spec).unwrap()).unwrap())
    }

    /// Breadth-first path with shuffled neighbour order.
    fn random_path(dual: &IsoradialDual, from: RVertex, to: RVertex, rng: &mut ChaCha8Rng) -> Vec<RVertex> {
        let np = dual.tri.vertices.len();
        let idx = |v: RVertex| match v {
            RVertex::Primal(u) => u,
            RVertex::Dual(f) => np + f,
        };
        let mut parent: Vec<Option<RVertex>> = vec![None; np + dual.len()];
        parent[idx(from)] = Some(from);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            let mut ns = neighbours(dual, v);
            ns.shuffle(rng);
            for u in ns {
                if parent[idx(u)].is_none() {
                    parent[idx(u)] = Some(v);
                    queue.push_back(u);
                }
            }
        }
        let mut path = vec![to];
        let mut v = to;
        while v != from {
            v = parent[idx(v)].unwrap();
            path.push(v);
        }
        path.reverse();
        path
    }

    #[test]
    fn trivial_and_adjacent() {
        let d = dual_of(RegionSpec::SquareGrid { m: 2, n: 2 });
        for w in d.whites() {
            let f = path_function(&d, w, RVertex::Dual(w), None).unwrap();
            assert!(f.approx_eq(&PathFunction::one(), 0.0));
            for &e in d.incident(w) {
                let edge = &d.edges[e];
                let f = path_function(&d, w, RVertex::Dual(edge.b), None).unwrap();
                assert!(f.numerator_roots.is_empty());
                let mut expect = PathFunction::one();
                expect.divide_root(edge.rhombus.alpha);
                expect.divide_root(edge.rhombus.beta);
                assert!(f.approx_eq(&expect, 1e-12));
            }
        }
        let black = d.blacks()[0];
        assert!(path_function(&d, black, RVertex::Dual(black), None).is_err());
    }

    #[test]
    fn path_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in [
            RegionSpec::SquareGrid { m: 3, n: 3 },
            RegionSpec::LozengeHexagon { a: 2, b: 2, c: 2 },
            RegionSpec::SingleRhombus { half_angle: 0.4 },
        ] {
            let d = dual_of(spec);
            let whites = d.whites();
            for _ in 0..20 {
                let w = whites[rng.gen_range(0..whites.len())];
                let v = if rng.gen_bool(0.5) {
                    RVertex::Dual(rng.gen_range(0..d.len()))
                } else {
                    RVertex::Primal(rng.gen_range(0..d.tri.vertices.len()))
                };
                let p1 = random_path(&d, RVertex::Dual(w), v, &mut rng);
                // detour through a random vertex
                let mid = RVertex::Primal(rng.gen_range(0..d.tri.vertices.len()));
                let mut p2 = random_path(&d, RVertex::Dual(w), mid, &mut rng);
                p2.extend(random_path(&d, mid, v, &mut rng).into_iter().skip(1));
                let f1 = path_function(&d, w, v, Some(&p1)).unwrap();
                let f2 = path_function(&d, w, v, Some(&p2)).unwrap();
                assert!(f1.approx_eq(&f2, 1e-12), "{f1:?} {f2:?}");
            }
        }
    }

    #[test]
    fn table_matches_single_queries() {
        let d = dual_of(RegionSpec::LozengeHexagon { a: 1, b: 2, c: 1 });
        let w = d.whites()[1];
        let table = path_function_table(&d, w).unwrap();
        for (v, f) in table.iter().enumerate() {
            let single = path_function(&d, w, RVertex::Dual(v), None).unwrap();
            assert!(f.as_ref().unwrap().approx_eq(&single, 1e-12));
        }
    }

    #[test]
    fn real_path_function_identities() {
        let d = dual_of(RegionSpec::SquareGrid { m: 3, n: 2 });
        let o = clockwise_odd_orientation(&d).unwrap();
        for w in d.whites() {
            let own = real_path_function(&d, &o, w, w, None).unwrap();
            assert!(own.approx_eq(&PathFunction::one(), 0.0));
            let table = real_path_function_table(&d, &o, w).unwrap();
            for x in 0..d.len() {
                let rf = table[x].as_ref().unwrap();
                let f = path_function(&d, w, RVertex::Dual(x), None).unwrap();
                let mut expect = f.clone();
                expect.scale(rf.eval(Complex64::new(0.0, 0.0)).conj());
                assert!(rf.approx_eq(&expect, 1e-12));
                let direct = real_path_function(&d, &o, w, x, None).unwrap();
                assert!(direct.approx_eq(rf, 1e-12));
            }
        }
    }

    #[test]
    fn real_path_function_around_a_face_is_one() {
        let d = dual_of(RegionSpec::LozengeHexagon { a: 1, b: 1, c: 1 });
        let o = clockwise_odd_orientation(&d).unwrap();
        let tri = &d.tri;
        for v in (0..tri.vertices.len()).filter(|&v| tri.is_interior(v)) {
            let faces = tri.vertex_faces(v);
            let start = (0..faces.len()).find(|&k| d.vertices[faces[k]].color == Color::White).unwrap();
            let mut path: Vec<usize> = (0..=faces.len()).map(|k| faces[(start + k) % faces.len()]).collect();
            let f = real_path_function(&d, &o, path[0], path[0], Some(&path)).unwrap();
            assert!(f.approx_eq(&PathFunction::one(), 1e-12));
            path.reverse();
            let f = real_path_function(&d, &o, path[0], path[0], Some(&path)).unwrap();
            assert!(f.approx_eq(&PathFunction::one(), 1e-12));
        }
    }

    #[test]
    fn cancellation_and_poles() {
        let mut f = PathFunction::one();
        f.divide_root(0.5);
        f.divide_root(0.5 + 2.0 * PI);
        f.divide_root(1.0);
        f.multiply_root(1.0);
        assert_eq!(f.poles(), vec![Pole { angle: 0.5, mult: 2 }]);
        assert!(f.numerator_roots.is_empty());
        let z = Complex64::new(0.3, -0.2);
        let expect = 1.0 / (z - Complex64::from_polar(1.0, 0.5)).powi(2);
        assert!((f.eval(z) - expect).norm() < 1e-14);
    }
}
