use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DimerConfig;
use crate::geometry::{add_diagonals, dual_graph, point_key, IsoradialDual, Point, RhombusPatch, TriangulatedPatch};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    /// Rotate an alternating dual cycle around an interior primal vertex.
    QuadriFlip,
    /// Flip a hexagon of three internally cut rhombi and re-cut the new ones.
    LozengeFlip,
}

/// An elementary operation.
///
/// For `QuadriFlip`, `support` lists the dual edges of the cycle in order. For `LozengeFlip` it
/// is `[center, r0, r1, r2]`: the patch vertex at the hexagon center and its three rhombi.
/// Bit `i` of `orientation_choice` picks the diagonal cutting new rhombus `i`
/// (0: from its corner 0 to corner 2, 1: from corner 1 to corner 3).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub kind: MoveKind,
    pub support: Vec<usize>,
    pub orientation_choice: u8,
}

/// Per-edge weights for the sampler.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeWeights {
    /// Critical weights, recomputed after every lozenge flip.
    Critical,
    /// Fixed weights indexed by dual edge id. Lozenge flips are disabled since they
    /// change the edge set.
    Custom(Vec<f64>),
}

fn internally_matched(dual: &IsoradialDual, partner: &[usize], r: usize) -> bool {
    (4 * r..4 * r + 4).all(|f| partner[f] / 4 == r && dual.tri.faces[partner[f]].rhombus == Some(r))
}

/// Hexagon around patch vertex `c`: rhombus ids, and the ring h0..h5 counterclockwise with
/// h0, h2, h4 adjacent to `c`.
fn hexagon(patch: &RhombusPatch, around: &[Vec<usize>], c: usize) -> Option<([usize; 3], [usize; 6])> {
    if around[c].len() != 3 || patch.boundary_cycles().iter().any(|cy| cy.contains(&c)) {
        return None;
    }
    let rotated: Vec<(usize, [usize; 4])> = around[c]
        .iter()
        .map(|&ri| {
            let r = patch.rhombi[ri];
            let k = r.iter().position(|&v| v == c).unwrap();
            (ri, [r[k], r[(k + 1) % 4], r[(k + 2) % 4], r[(k + 3) % 4]])
        })
        .collect();
    let mut ids = [rotated[0].0; 3];
    let mut ring = [0; 6];
    let mut cur = rotated[0].1;
    for i in 0..3 {
        ring[2 * i] = cur[1];
        ring[2 * i + 1] = cur[2];
        if i < 2 {
            let next = rotated.iter().find(|(_, r)| r[1] == cur[3])?;
            ids[i + 1] = next.0;
            cur = next.1;
        }
    }
    (cur[3] == ring[0]).then_some((ids, ring))
}

fn rhombi_around(patch: &RhombusPatch) -> Vec<Vec<usize>> {
    let mut around = vec![Vec::new(); patch.vertices.len()];
    for (ri, r) in patch.rhombi.iter().enumerate() {
        for &v in r {
            around[v].push(ri);
        }
    }
    around
}

/// Dual cycle around interior primal vertex `v`, if it alternates in the matching.
fn alternating_cycle(dual: &IsoradialDual, m: &DimerConfig, v: usize) -> Option<Vec<usize>> {
    let faces = dual.tri.vertex_faces(v);
    let d = faces.len();
    if d % 2 == 1 {
        return None;
    }
    let cycle: Vec<usize> = (0..d)
        .map(|k| dual.edge_between(faces[k], faces[(k + 1) % d]))
        .collect::<Option<_>>()?;
    let on: Vec<bool> = cycle.iter().map(|&e| m.contains(e)).collect();
    let alternating = (0..d).all(|k| on[k] != on[(k + 1) % d]);
    alternating.then_some(cycle)
}

pub fn elementary_moves(dual: &IsoradialDual, m: &DimerConfig) -> Vec<Move> {
    elementary_moves_with(dual, m, true)
}

fn elementary_moves_with(dual: &IsoradialDual, m: &DimerConfig, lozenges: bool) -> Vec<Move> {
    let tri = &dual.tri;
    let mut out: Vec<Move> = (0..tri.vertices.len())
        .filter(|&v| tri.is_interior(v))
        .filter_map(|v| alternating_cycle(dual, m, v))
        .map(|support| Move { kind: MoveKind::QuadriFlip, support, orientation_choice: 0 })
        .collect();
    let Some(patch) = tri.base.as_ref().filter(|_| lozenges) else {
        return out;
    };
    let partner = m.partners(dual);
    let around = rhombi_around(patch);
    for c in 0..patch.vertices.len() {
        if let Some((ids, _)) = hexagon(patch, &around, c) {
            if ids.iter().all(|&r| internally_matched(dual, &partner, r)) {
                for choice in 0..8u8 {
                    out.push(Move {
                        kind: MoveKind::LozengeFlip,
                        support: vec![c, ids[0], ids[1], ids[2]],
                        orientation_choice: choice,
                    });
                }
            }
        }
    }
    out
}

fn face_key(tri: &TriangulatedPatch, f: usize) -> [(i64, i64); 3] {
    let mut k = tri.faces[f].verts.map(|v| point_key(tri.vertices[v].pos));
    k.sort_unstable();
    k
}

/// Matched face pairs of rhombus `r` cut along diagonal 0-2 (`bit` 0) or 1-3 (`bit` 1).
fn cut_pairs(r: usize, bit: bool) -> [(usize, usize); 2] {
    let f = |k: usize| 4 * r + k;
    if bit {
        [(f(1), f(2)), (f(3), f(0))]
    } else {
        [(f(0), f(1)), (f(2), f(3))]
    }
}

/// Applies a move. Lozenge flips also return the dual graph of the flipped patch, which the
/// new configuration refers to.
pub fn apply_move(dual: &IsoradialDual, m: &DimerConfig, mv: &Move) -> Result<(Option<IsoradialDual>, DimerConfig)> {
    match mv.kind {
        MoveKind::QuadriFlip => {
            let cycle = &mv.support;
            let d = cycle.len();
            let stale = || Error::StaleMove(format!("cycle {cycle:?} does not alternate"));
            if d < 4 || d % 2 == 1 || cycle.iter().any(|&e| e >= dual.edges.len()) {
                return Err(stale());
            }
            let on: Vec<bool> = cycle.iter().map(|&e| m.contains(e)).collect();
            if (0..d).any(|k| on[k] == on[(k + 1) % d]) {
                return Err(stale());
            }
            let flipped: HashSet<usize> = cycle.iter().copied().collect();
            let mut matched: Vec<usize> = m.matched.iter().copied().filter(|e| !flipped.contains(e)).collect();
            matched.extend(cycle.iter().zip(&on).filter(|(_, &o)| !o).map(|(&e, _)| e));
            let out = DimerConfig::new(matched);
            out.validate(dual).map_err(|e| Error::StaleMove(e.to_string()))?;
            Ok((None, out))
        }
        MoveKind::LozengeFlip => {
            let (new_dual, out) = lozenge_flip(dual, m, mv)?;
            Ok((Some(new_dual), out))
        }
    }
}

fn lozenge_flip(dual: &IsoradialDual, m: &DimerConfig, mv: &Move) -> Result<(IsoradialDual, DimerConfig)> {
    let stale = |why: &str| Error::StaleMove(format!("lozenge flip {:?}: {why}", mv.support));
    let patch = dual.tri.base.as_ref().ok_or_else(|| stale("no underlying rhombus patch"))?;
    if mv.support.len() != 4 || mv.support[0] >= patch.vertices.len() || mv.orientation_choice >= 8 {
        return Err(stale("malformed support"));
    }
    let c = mv.support[0];
    let around = rhombi_around(patch);
    let (ids, ring) = hexagon(patch, &around, c).ok_or_else(|| stale("not a hexagon center"))?;
    let mut want = mv.support[1..].to_vec();
    want.sort_unstable();
    let mut have = ids.to_vec();
    have.sort_unstable();
    if want != have {
        return Err(stale("rhombi changed"));
    }
    m.validate(dual).map_err(|e| stale(&e.to_string()))?;
    let partner = m.partners(dual);
    if !ids.iter().all(|&r| internally_matched(dual, &partner, r)) {
        return Err(stale("rhombi not internally matched"));
    }

    let pos = |v: usize| patch.pos(v);
    let mut points: Vec<Point> = (0..patch.vertices.len()).map(pos).collect();
    // from the ring only, so repeated flips do not amplify rounding
    let odd = pos(ring[1]) + pos(ring[3]) + pos(ring[5]);
    let even = pos(ring[0]) + pos(ring[2]) + pos(ring[4]);
    points[c] = (2.0 * odd - even) / 3.0;
    let mut rhombi = patch.rhombi.clone();
    for i in 0..3 {
        rhombi[ids[i]] = [c, ring[2 * i + 1], ring[(2 * i + 2) % 6], ring[(2 * i + 3) % 6]];
    }
    let new_patch = RhombusPatch::from_geometry(points, rhombi)?;
    let new_dual = dual_graph(&add_diagonals(&new_patch)?);

    let index: HashMap<[(i64, i64); 3], usize> =
        (0..new_dual.tri.faces.len()).map(|f| (face_key(&new_dual.tri, f), f)).collect();
    let inside: HashSet<usize> = ids.iter().copied().collect();
    let mut matched = Vec::with_capacity(m.matched.len());
    for &e in &m.matched {
        let d = &dual.edges[e];
        if dual.tri.faces[d.w].rhombus.is_some_and(|r| inside.contains(&r)) {
            continue;
        }
        let (a, b) = (index[&face_key(&dual.tri, d.w)], index[&face_key(&dual.tri, d.b)]);
        matched.push(new_dual.edge_between(a, b).ok_or_else(|| stale("tile lost after flip"))?);
    }
    for (i, &r) in ids.iter().enumerate() {
        for (a, b) in cut_pairs(r, mv.orientation_choice >> i & 1 == 1) {
            matched.push(new_dual.edge_between(a, b).ok_or_else(|| stale("cut is not a dual edge"))?);
        }
    }
    let out = DimerConfig::new(matched);
    out.validate(&new_dual)?;
    Ok((new_dual, out))
}

/// Every rhombus cut along its shorter diagonal (0-2 on ties). Without an underlying rhombus
/// patch, falls back to a maximum matching.
pub fn initial_config(dual: &IsoradialDual) -> Result<DimerConfig> {
    let Some(patch) = dual.tri.base.as_ref() else {
        return any_matching(dual);
    };
    let mut matched = Vec::with_capacity(2 * patch.rhombi.len());
    for (ri, r) in patch.rhombi.iter().enumerate() {
        let d02 = (patch.pos(r[0]) - patch.pos(r[2])).norm();
        let d13 = (patch.pos(r[1]) - patch.pos(r[3])).norm();
        for (a, b) in cut_pairs(ri, d13 < d02 - 1e-9) {
            matched.push(dual.edge_between(a, b).ok_or(Error::NoMatching)?);
        }
    }
    let m = DimerConfig::new(matched);
    m.validate(dual)?;
    Ok(m)
}

/// Augmenting-path bipartite matching.
fn any_matching(dual: &IsoradialDual) -> Result<DimerConfig> {
    let whites = dual.whites();
    let mut owner: Vec<Option<usize>> = vec![None; dual.len()];
    fn augment(dual: &IsoradialDual, w: usize, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &e in dual.incident(w) {
            let b = dual.other(e, w);
            if seen[b] {
                continue;
            }
            seen[b] = true;
            let free = match owner[b] {
                None => true,
                Some(prev) => augment(dual, dual.other(prev, b), seen, owner),
            };
            if free {
                owner[b] = Some(e);
                return true;
            }
        }
        false
    }
    for &w in &whites {
        let mut seen = vec![false; dual.len()];
        if !augment(dual, w, &mut seen, &mut owner) {
            return Err(Error::NoMatching);
        }
    }
    let m = DimerConfig::new(owner.into_iter().flatten().collect());
    m.validate(dual).map_err(|_| Error::NoMatching)?;
    Ok(m)
}

/// Metropolis-Hastings chain over elementary moves, proposing uniformly from the current move
/// list and targeting the product of edge weights.
#[derive(Clone, Debug)]
pub struct Sampler {
    dual: IsoradialDual,
    config: DimerConfig,
    weights: EdgeWeights,
    moves: Vec<Move>,
    rng: ChaCha8Rng,
    pub proposed: u64,
    pub accepted: u64,
}

impl Sampler {
    pub fn new(tri: &TriangulatedPatch, seed: u64, weights: EdgeWeights) -> Result<Self> {
        let dual = dual_graph(tri);
        if let EdgeWeights::Custom(w) = &weights {
            if w.len() != dual.edges.len() {
                return Err(Error::InvalidQuery(format!("{} weights for {} edges", w.len(), dual.edges.len())));
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidQuery("weights must be finite and non-negative".into()));
            }
        }
        let config = initial_config(&dual)?;
        let mut s = Sampler { dual, config, weights, moves: Vec::new(), rng: ChaCha8Rng::seed_from_u64(seed), proposed: 0, accepted: 0 };
        s.moves = s.moves_of(&s.dual, &s.config);
        Ok(s)
    }

    fn moves_of(&self, dual: &IsoradialDual, m: &DimerConfig) -> Vec<Move> {
        elementary_moves_with(dual, m, self.weights == EdgeWeights::Critical)
    }

    pub fn dual(&self) -> &IsoradialDual {
        &self.dual
    }

    pub fn config(&self) -> &DimerConfig {
        &self.config
    }

    /// One proposal; returns whether it was accepted.
    pub fn step(&mut self) -> Result<bool> {
        if self.moves.is_empty() {
            return Ok(false);
        }
        self.proposed += 1;
        let mv = self.moves[self.rng.gen_range(0..self.moves.len())].clone();
        let (new_dual, new_config) = apply_move(&self.dual, &self.config, &mv)?;
        let target = new_dual.as_ref().unwrap_or(&self.dual);
        let ratio = match &self.weights {
            EdgeWeights::Custom(w) => {
                let added: f64 = new_config.matched.iter().filter(|e| !self.config.contains(**e)).map(|&e| w[e]).product();
                let removed: f64 = self.config.matched.iter().filter(|e| !new_config.contains(**e)).map(|&e| w[e]).product();
                if removed == 0.0 {
                    f64::INFINITY
                } else {
                    added / removed
                }
            }
            EdgeWeights::Critical => {
                let log_w = |d: &IsoradialDual, m: &DimerConfig| m.matched.iter().map(|&e| d.edges[e].nu.ln()).sum::<f64>();
                (log_w(target, &new_config) - log_w(&self.dual, &self.config)).exp()
            }
        };
        let new_moves = self.moves_of(target, &new_config);
        let hastings = self.moves.len() as f64 / new_moves.len().max(1) as f64;
        let accept = ratio * hastings >= 1.0 || self.rng.gen::<f64>() < ratio * hastings;
        if accept {
            self.accepted += 1;
            if let Some(d) = new_dual {
                self.dual = d;
            }
            self.config = new_config;
            self.moves = new_moves;
        }
        Ok(accept)
    }

    pub fn run(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    pub fn into_parts(self) -> (IsoradialDual, DimerConfig) {
        (self.dual, self.config)
    }
}

/// Runs a chain from the initial configuration and returns the final state.
pub fn sample_mcmc(tri: &TriangulatedPatch, steps: usize, seed: u64, weights: EdgeWeights) -> Result<(IsoradialDual, DimerConfig)> {
    let mut s = Sampler::new(tri, seed, weights)?;
    s.run(steps)?;
    Ok(s.into_parts())
}
