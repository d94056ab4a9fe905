use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{cross, Color, Point, TOL};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PatchVertex {
    pub id: usize,
    pub pos: Point,
    pub color: Color,
}

/// A finite rhombus tiling with side-length-2 rhombi.
///
/// Rhombi store vertex indices (not file ids) in counterclockwise order.
#[derive(Clone, Debug)]
pub struct RhombusPatch {
    pub vertices: Vec<PatchVertex>,
    pub rhombi: Vec<[usize; 4]>,
    edges: Vec<(usize, usize)>,
    edge_rhombi: Vec<Vec<usize>>,
    boundary: Vec<Vec<usize>>,
    simply_connected: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RegionSpec {
    /// One rhombus whose angle at its first vertex is `2 * half_angle`.
    SingleRhombus { half_angle: f64 },
    /// The `a, b, c` hexagon of 60-degree lozenges in its stacked tiling.
    LozengeHexagon { a: usize, b: usize, c: usize },
    SquareGrid { m: usize, n: usize },
    FromFile(PathBuf),
}

impl std::str::FromStr for RegionSpec {
    type Err = Error;

    /// Parses `rhombus:THETA`, `hex:A,B,C`, `square:M,N` or `file:PATH`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidRegion(format!("expected KIND:ARGS, got {s:?}")))?;
        let ints = |n: usize| -> Result<Vec<usize>> {
            let v: std::result::Result<Vec<usize>, _> = args.split(',').map(|t| t.trim().parse()).collect();
            match v {
                Ok(v) if v.len() == n => Ok(v),
                _ => Err(Error::InvalidRegion(format!("expected {n} non-negative integers in {s:?}"))),
            }
        };
        match kind {
            "rhombus" => {
                let half_angle = args
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidRegion(format!("bad angle in {s:?}")))?;
                Ok(RegionSpec::SingleRhombus { half_angle })
            }
            "hex" => {
                let v = ints(3)?;
                Ok(RegionSpec::LozengeHexagon { a: v[0], b: v[1], c: v[2] })
            }
            "square" => {
                let v = ints(2)?;
                Ok(RegionSpec::SquareGrid { m: v[0], n: v[1] })
            }
            "file" => Ok(RegionSpec::FromFile(PathBuf::from(args))),
            _ => Err(Error::InvalidRegion(format!("unknown region kind {kind:?}"))),
        }
    }
}

pub fn build_patch(spec: &RegionSpec) -> Result<RhombusPatch> {
    match *spec {
        RegionSpec::SingleRhombus { half_angle } => single_rhombus(half_angle),
        RegionSpec::LozengeHexagon { a, b, c } => lozenge_hexagon(a, b, c),
        RegionSpec::SquareGrid { m, n } => square_grid(m, n),
        RegionSpec::FromFile(ref p) => RhombusPatch::read_json(p),
    }
}

fn single_rhombus(half_angle: f64) -> Result<RhombusPatch> {
    let angle = 2.0 * half_angle;
    if !(angle > 0.0 && angle < std::f64::consts::PI) {
        return Err(Error::InvalidRegion(format!("rhombus angle {angle} outside (0, pi)")));
    }
    let u = Point::new(2.0, 0.0);
    let v = Point::from_polar(2.0, angle);
    RhombusPatch::from_geometry(vec![Point::new(0.0, 0.0), u, u + v, v], vec![[0, 1, 2, 3]])
}

fn lozenge_hexagon(a: usize, b: usize, c: usize) -> Result<RhombusPatch> {
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::InvalidRegion("hexagon side counts must be positive".into()));
    }
    let s3 = 3f64.sqrt();
    // lattice coordinates (p, q) with position p*e1 + q*e2, e3 = e2 - e1
    let pos = |p: i64, q: i64| Point::new(2.0 * p as f64 + q as f64, s3 * q as f64);
    let e1 = (1i64, 0i64);
    let e2 = (0i64, 1i64);
    let e3 = (-1i64, 1i64);
    let add = |x: (i64, i64), y: (i64, i64), s: i64| (x.0 + s * y.0, x.1 + s * y.1);
    let mut cells: Vec<[(i64, i64); 4]> = Vec::new();
    let para = |origin: (i64, i64), u: (i64, i64), nu: usize, v: (i64, i64), nv: usize, cells: &mut Vec<[(i64, i64); 4]>| {
        for i in 0..nu as i64 {
            for j in 0..nv as i64 {
                let o = add(add(origin, u, i), v, j);
                cells.push([o, add(o, u, 1), add(add(o, u, 1), v, 1), add(o, v, 1)]);
            }
        }
    };
    para((0, 0), e1, a, e2, b, &mut cells);
    para(add((0, 0), e2, b as i64), e1, a, e3, c, &mut cells);
    para((0, 0), e2, b, e3, c, &mut cells);
    lattice_patch(&cells, |k| pos(k.0, k.1))
}

fn square_grid(m: usize, n: usize) -> Result<RhombusPatch> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidRegion("grid dimensions must be positive".into()));
    }
    let mut cells = Vec::new();
    for j in 0..n as i64 {
        for i in 0..m as i64 {
            cells.push([(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]);
        }
    }
    lattice_patch(&cells, |k| Point::new(2.0 * k.0 as f64, 2.0 * k.1 as f64))
}

/// Builds a patch from rhombi given by integer lattice keys; vertex ids follow
/// the lexicographic order of positions.
pub(crate) fn lattice_patch(cells: &[[(i64, i64); 4]], pos: impl Fn((i64, i64)) -> Point) -> Result<RhombusPatch> {
    let mut keys: Vec<(i64, i64)> = cells.iter().flatten().copied().collect();
    keys.sort_by(|a, b| {
        let (pa, pb) = (pos(*a), pos(*b));
        pa.re.partial_cmp(&pb.re).unwrap().then(pa.im.partial_cmp(&pb.im).unwrap())
    });
    keys.dedup();
    let index: HashMap<(i64, i64), usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let points = keys.iter().map(|k| pos(*k)).collect();
    let rhombi = cells.iter().map(|c| c.map(|k| index[&k])).collect();
    RhombusPatch::from_geometry(points, rhombi)
}

impl RhombusPatch {
    /// Builds a patch from positions and rhombi, coloring vertices so that the
    /// lexicographically smallest vertex is white.
    pub fn from_geometry(points: Vec<Point>, rhombi: Vec<[usize; 4]>) -> Result<Self> {
        let n = points.len();
        let mut adj = vec![Vec::new(); n];
        for r in &rhombi {
            for k in 0..4 {
                let (a, b) = (r[k], r[(k + 1) % 4]);
                if a >= n || b >= n {
                    return Err(Error::MalformedPatch(format!("rhombus references missing vertex in {r:?}")));
                }
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut color: Vec<Option<Color>> = vec![None; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (points[a], points[b]);
            pa.re.partial_cmp(&pb.re).unwrap().then(pa.im.partial_cmp(&pb.im).unwrap())
        });
        for &s in &order {
            if color[s].is_some() {
                continue;
            }
            color[s] = Some(Color::White);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    match color[v] {
                        None => {
                            color[v] = Some(color[u].unwrap().flip());
                            queue.push_back(v);
                        }
                        Some(c) if c == color[u].unwrap() => return Err(Error::NotBipartite(u, v)),
                        _ => {}
                    }
                }
            }
        }
        let vertices = points
            .into_iter()
            .enumerate()
            .map(|(id, pos)| PatchVertex { id, pos, color: color[id].unwrap_or(Color::White) })
            .collect();
        Self::new(vertices, rhombi)
    }

    /// Validates and derives edges and boundary from explicit vertices and rhombi.
    pub fn new(vertices: Vec<PatchVertex>, rhombi: Vec<[usize; 4]>) -> Result<Self> {
        let n = vertices.len();
        let mut edge_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut edge_rhombi: Vec<Vec<usize>> = Vec::new();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (ri, r) in rhombi.iter().enumerate() {
            let mut distinct = r.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() != 4 || r.iter().any(|&v| v >= n) {
                return Err(Error::MalformedPatch(format!("rhombus {ri} has invalid vertices {r:?}")));
            }
            let p = r.map(|v| vertices[v].pos);
            for k in 0..4 {
                let len = (p[(k + 1) % 4] - p[k]).norm();
                if (len - 2.0).abs() > TOL {
                    return Err(Error::MalformedPatch(format!("rhombus {ri} has side length {len}")));
                }
            }
            if (p[0] + p[2] - p[1] - p[3]).norm() > TOL {
                return Err(Error::MalformedPatch(format!("rhombus {ri} is not a parallelogram")));
            }
            let turn = cross(p[1] - p[0], p[3] - p[0]);
            if turn <= TOL {
                return Err(Error::MalformedPatch(format!(
                    "rhombus {ri} is degenerate or not counterclockwise (angle outside (0, pi))"
                )));
            }
            for k in 0..4 {
                let (a, b) = (r[k], r[(k + 1) % 4]);
                if directed.insert((a, b), ri).is_some() {
                    return Err(Error::MalformedPatch(format!("directed edge {a}->{b} used twice")));
                }
                if vertices[a].color == vertices[b].color {
                    return Err(Error::NotBipartite(vertices[a].id, vertices[b].id));
                }
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_rhombi.push(Vec::new());
                    edges.len() - 1
                });
                edge_rhombi[e].push(ri);
            }
        }
        // connectivity over rhombus edges
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let used: Vec<usize> = (0..n).filter(|&v| !adj[v].is_empty()).collect();
        if used.len() != n {
            return Err(Error::MalformedPatch("patch has vertices outside every rhombus".into()));
        }
        if n > 0 {
            let mut seen = vec![false; n];
            seen[0] = true;
            let mut stack = vec![0];
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::MalformedPatch("patch is not edge-connected".into()));
            }
        }
        // boundary: directed edges whose reverse is absent, interior on the left
        let mut out: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut bcount = 0;
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                out.entry(a).or_default().push(b);
                bcount += 1;
            }
        }
        let pinched = out.values().any(|v| v.len() > 1);
        let mut boundary = Vec::new();
        let mut starts: Vec<usize> = out.keys().copied().collect();
        starts.sort_unstable();
        let mut visited: HashMap<(usize, usize), bool> = HashMap::new();
        for s in starts {
            for &t in out[&s].clone().iter() {
                if visited.contains_key(&(s, t)) {
                    continue;
                }
                let mut cycle = vec![s];
                let (mut u, mut v) = (s, t);
                loop {
                    visited.insert((u, v), true);
                    if v == s {
                        break;
                    }
                    cycle.push(v);
                    let next = out[&v].iter().copied().find(|&x| !visited.contains_key(&(v, x)));
                    match next {
                        Some(x) => {
                            u = v;
                            v = x;
                        }
                        None => break,
                    }
                }
                let _ = u;
                boundary.push(cycle);
            }
        }
        debug_assert_eq!(boundary.iter().map(Vec::len).sum::<usize>(), bcount);
        let euler = n as i64 - edges.len() as i64 + rhombi.len() as i64;
        let simply_connected = euler == 1 && boundary.len() == 1 && !pinched;
        // put the outer (positively oriented) cycle first
        boundary.sort_by(|x, y| {
            let ax = signed_area(x, &vertices);
            let ay = signed_area(y, &vertices);
            ay.partial_cmp(&ax).unwrap()
        });
        Ok(RhombusPatch { vertices, rhombi, edges, edge_rhombi, boundary, simply_connected })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Rhombi containing each edge of [`Self::edges`].
    pub fn edge_rhombi(&self) -> &[Vec<usize>] {
        &self.edge_rhombi
    }

    /// Boundary vertex cycles, counterclockwise, outer cycle first.
    pub fn boundary_cycles(&self) -> &[Vec<usize>] {
        &self.boundary
    }

    /// The outer boundary as a cyclic list of directed edges.
    pub fn boundary(&self) -> Vec<(usize, usize)> {
        match self.boundary.first() {
            None => Vec::new(),
            Some(c) => (0..c.len()).map(|i| (c[i], c[(i + 1) % c.len()])).collect(),
        }
    }

    pub fn simply_connected(&self) -> bool {
        self.simply_connected
    }

    pub fn pos(&self, v: usize) -> Point {
        self.vertices[v].pos
    }

    /// Index of the vertex whose position matches `p` within tolerance.
    pub fn find_vertex(&self, p: Point) -> Option<usize> {
        self.vertices.iter().position(|v| (v.pos - p).norm() < 1e-6)
    }

    pub fn translated(&self, t: Point) -> RhombusPatch {
        let mut out = self.clone();
        for v in &mut out.vertices {
            v.pos += t;
        }
        out
    }

    pub fn area(&self) -> f64 {
        self.rhombi
            .iter()
            .map(|r| cross(self.pos(r[1]) - self.pos(r[0]), self.pos(r[3]) - self.pos(r[0])))
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = PatchFile {
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexRecord { id: v.id, x: v.pos.re, y: v.pos.im, color: v.color })
                .collect(),
            rhombi: self.rhombi.iter().map(|r| r.map(|v| self.vertices[v].id)).collect(),
        };
        serde_json::to_value(file).expect("patch serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let file: PatchFile =
            serde_json::from_value(value.clone()).map_err(|e| Error::MalformedPatch(e.to_string()))?;
        let mut index = HashMap::new();
        let mut vertices = Vec::with_capacity(file.vertices.len());
        for (i, v) in file.vertices.iter().enumerate() {
            if index.insert(v.id, i).is_some() {
                return Err(Error::MalformedPatch(format!("duplicate vertex id {}", v.id)));
            }
            vertices.push(PatchVertex { id: v.id, pos: Point::new(v.x, v.y), color: v.color });
        }
        let mut rhombi = Vec::with_capacity(file.rhombi.len());
        for r in &file.rhombi {
            let mut q = [0; 4];
            for k in 0..4 {
                q[k] = *index
                    .get(&r[k])
                    .ok_or_else(|| Error::MalformedPatch(format!("unknown vertex id {}", r[k])))?;
            }
            rhombi.push(q);
        }
        Self::new(vertices, rhombi)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::MalformedPatch(e.to_string()))?;
        Self::from_json(&value)
    }
}

fn signed_area(cycle: &[usize], vertices: &[PatchVertex]) -> f64 {
    let n = cycle.len();
    (0..n).map(|i| cross(vertices[cycle[i]].pos, vertices[cycle[(i + 1) % n]].pos)).sum::<f64>() / 2.0
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    id: usize,
    x: f64,
    y: f64,
    color: Color,
}

#[derive(Serialize, Deserialize)]
struct PatchFile {
    vertices: Vec<VertexRecord>,
    rhombi: Vec<[usize; 4]>,
}
