use std::collections::{BTreeSet, HashMap, VecDeque};
use std::f64::consts::PI;

use super::{
    canonical_boundary, center_key, convex_overlap, corners, edge_ids, edge_mid, exterior_angle, extend_patch, total_turning,
    tracks_of_rhombi, train_tracks, TrainTrack,
};
use crate::geometry::{cross, Point, RhombusPatch};
use crate::{Error, Result};

/// A simply connected patch whose boundary is a convex polygon with opposite edges parallel,
/// equal and reversed.
#[derive(Clone, Debug)]
pub struct ConvexZonogon {
    pub patch: RhombusPatch,
    /// Directed boundary edges e₁..e_n, e₁⁻¹..e_n⁻¹, starting at the lowest then leftmost vertex.
    pub boundary: Vec<(usize, usize)>,
}

impl ConvexZonogon {
    pub fn new(patch: RhombusPatch) -> Result<Self> {
        if !patch.simply_connected() {
            return Err(Error::NotSimplyConnected("a zonogon must be simply connected".into()));
        }
        let boundary = canonical_boundary(&patch);
        let z = ConvexZonogon { patch, boundary };
        let e = z.edge_vectors();
        let m = e.len();
        if !m.is_multiple_of(2) || m < 4 {
            return Err(Error::Geometry(format!("zonogon boundary has {m} edges")));
        }
        let n = m / 2;
        if (0..n).any(|i| (e[i] + e[i + n]).norm() > 1e-6) {
            return Err(Error::Geometry("opposite boundary edges are not reversed translates".into()));
        }
        if (0..m).any(|i| exterior_angle(e[i], e[(i + 1) % m]) < -1e-9) {
            return Err(Error::Geometry("boundary is not convex".into()));
        }
        if (total_turning(&e) - 2.0 * PI).abs() > 1e-9 {
            return Err(Error::Geometry("boundary does not turn once".into()));
        }
        Ok(z)
    }

    pub fn edge_vectors(&self) -> Vec<Point> {
        self.boundary.iter().map(|&(a, b)| self.patch.pos(b) - self.patch.pos(a)).collect()
    }

    /// Number of edges in each half of the boundary.
    pub fn half(&self) -> usize {
        self.boundary.len() / 2
    }

    /// Runs of parallel edges in e₁..e_n: the edge vector and how many times it repeats.
    pub fn directions(&self) -> Vec<(Point, usize)> {
        let e = self.edge_vectors();
        let mut out: Vec<(Point, usize)> = Vec::new();
        for &v in &e[..self.half()] {
            match out.last_mut() {
                Some((u, k)) if cross(*u, v).abs() < 1e-9 => *k += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

/// Number of patch boundary edges each ambient track meeting `sub` crosses; `sub` must consist of
/// rhombi of `ambient` at the same positions.
pub fn track_boundary_crossings(sub: &RhombusPatch, ambient: &RhombusPatch) -> Result<Vec<usize>> {
    let inside = membership(sub, ambient)?;
    let tracks = train_tracks(ambient);
    Ok(tracks
        .iter()
        .filter(|t| t.rhombi.iter().any(|&r| inside[r]))
        .map(|t| crossings(ambient, t, &inside))
        .collect())
}

fn membership(sub: &RhombusPatch, ambient: &RhombusPatch) -> Result<Vec<bool>> {
    let index: HashMap<(i64, i64), usize> =
        (0..ambient.rhombi.len()).map(|r| (center_key(&corners(ambient, r)), r)).collect();
    let mut inside = vec![false; ambient.rhombi.len()];
    for r in 0..sub.rhombi.len() {
        let q = corners(sub, r);
        let a = index
            .get(&center_key(&q))
            .copied()
            .filter(|&a| {
                let c = corners(ambient, a);
                q.iter().all(|p| c.iter().any(|x| (x - p).norm() < 1e-6))
            })
            .ok_or_else(|| Error::InvalidRegion(format!("rhombus {r} of the patch is not a rhombus of the ambient patch")))?;
        inside[a] = true;
    }
    Ok(inside)
}

fn crossings(ambient: &RhombusPatch, t: &TrainTrack, inside: &[bool]) -> usize {
    let er = ambient.edge_rhombi();
    t.edges.iter().filter(|&&e| er[e].iter().filter(|&&r| inside[r]).count() == 1).count()
}

/// Grows `p` inside `ambient` until every ambient track meeting it crosses its boundary exactly
/// twice, absorbing each outside stretch of a track that leaves and re-enters, together with the
/// bounded region it cuts off.
pub fn make_track_convex(p: &RhombusPatch, ambient: &RhombusPatch) -> Result<RhombusPatch> {
    if !p.simply_connected() {
        return Err(Error::NotSimplyConnected("the patch to complete has holes".into()));
    }
    let mut inside = membership(p, ambient)?;
    let original = inside.clone();
    let tracks = train_tracks(ambient);
    loop {
        let mut changed = false;
        for t in &tracks {
            let idx: Vec<usize> = (0..t.len()).filter(|&i| inside[t.rhombi[i]]).collect();
            for w in idx.windows(2) {
                if w[1] > w[0] + 1 && (w[0] + 1..w[1]).all(|i| !inside[t.rhombi[i]]) {
                    for r in enclosed(ambient, t, w[0] + 1, w[1], &inside)? {
                        inside[r] = true;
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let added: Vec<[Point; 4]> =
        (0..ambient.rhombi.len()).filter(|&r| inside[r] && !original[r]).map(|r| corners(ambient, r)).collect();
    let out = extend_patch(p, &added)?;
    if !out.simply_connected() {
        return Err(Error::Geometry("track-convex completion is not simply connected".into()));
    }
    Ok(out)
}

/// The stretch `t.rhombi[s..e]` together with the component of its complement it bounds.
fn enclosed(ambient: &RhombusPatch, t: &TrainTrack, s: usize, e: usize, inside: &[bool]) -> Result<Vec<usize>> {
    let er = ambient.edge_rhombi();
    let ids = edge_ids(ambient);
    let stretch: BTreeSet<usize> = t.rhombi[s..e].iter().copied().collect();
    let blocked = |r: usize| inside[r] || stretch.contains(&r);
    // seeds on each side; `open` records a side edge on the ambient boundary
    let mut seeds = [Vec::new(), Vec::new()];
    let mut open = [false, false];
    for i in s..e {
        let r = t.rhombi[i];
        let (a, b) = (t.edges[i], t.edges[i + 1]);
        let walking = edge_mid(ambient, b) - edge_mid(ambient, a);
        let q = ambient.rhombi[r];
        let center = (ambient.pos(q[0]) + ambient.pos(q[2])) / 2.0;
        for k in 0..4 {
            let edge = ids[&(q[k].min(q[(k + 1) % 4]), q[k].max(q[(k + 1) % 4]))];
            if edge == a || edge == b {
                continue;
            }
            let side = usize::from(cross(walking, edge_mid(ambient, edge) - center) < 0.0);
            match er[edge].iter().find(|&&x| x != r) {
                None => open[side] = true,
                Some(&x) if !blocked(x) => seeds[side].push(x),
                _ => {}
            }
        }
    }
    let mut regions = [Vec::new(), Vec::new()];
    for side in 0..2 {
        let mut seen: BTreeSet<usize> = seeds[side].iter().copied().collect();
        let mut queue: VecDeque<usize> = seen.iter().copied().collect();
        while let Some(r) = queue.pop_front() {
            let q = ambient.rhombi[r];
            for k in 0..4 {
                let edge = ids[&(q[k].min(q[(k + 1) % 4]), q[k].max(q[(k + 1) % 4]))];
                match er[edge].iter().find(|&&x| x != r) {
                    None => open[side] = true,
                    Some(&x) if !blocked(x) && seen.insert(x) => queue.push_back(x),
                    _ => {}
                }
            }
        }
        regions[side] = seen.into_iter().collect();
    }
    let bounded = match open {
        [false, true] => 0,
        [true, false] => 1,
        _ => {
            return Err(Error::AmbientTooSmall(format!(
                "the region cut off by a track stretch of {} rhombi is not contained in the ambient patch",
                e - s
            )))
        }
    };
    let mut out: Vec<usize> = stretch.into_iter().collect();
    out.extend(&regions[bounded]);
    Ok(out)
}

/// Number of distinct pairs of tracks that cross.
fn crossing_pairs(patch: &RhombusPatch, tracks: &[TrainTrack]) -> Result<usize> {
    let mut pairs = BTreeSet::new();
    for ts in tracks_of_rhombi(patch, tracks) {
        if !pairs.insert((ts[0].min(ts[1]), ts[0].max(ts[1]))) {
            return Err(Error::Geometry("two train-tracks cross twice".into()));
        }
    }
    Ok(pairs.len())
}

fn non_parallel_pairs(tracks: &[TrainTrack]) -> usize {
    let n = tracks.len();
    (0..n).map(|a| (a + 1..n).filter(|&b| !tracks[a].parallel_to(&tracks[b])).count()).sum()
}

/// Adds rhombi at reflex boundary corners, always the first one counterclockwise from the lowest
/// vertex, until every pair of non-parallel tracks crosses.
pub fn complete_to_convex(p: &RhombusPatch) -> Result<ConvexZonogon> {
    if !p.simply_connected() {
        return Err(Error::NotSimplyConnected("the patch to complete has holes".into()));
    }
    let mut q = p.clone();
    let count = train_tracks(p).len();
    let target = non_parallel_pairs(&train_tracks(p));
    loop {
        let tracks = train_tracks(&q);
        if tracks.len() != count {
            return Err(Error::Geometry(
                "the patch is not train-track-convex: completion joined two of its tracks".into(),
            ));
        }
        if crossing_pairs(&q, &tracks)? == target {
            return ConvexZonogon::new(q);
        }
        let b = canonical_boundary(&q);
        let m = b.len();
        let vec = |i: usize| q.pos(b[i % m].1) - q.pos(b[i % m].0);
        let j = (0..m)
            .find(|&j| exterior_angle(vec(j), vec(j + 1)) < -1e-9)
            .ok_or_else(|| Error::Geometry("no reflex corner left although some tracks do not cross".into()))?;
        let (x, v, y) = (q.pos(b[j].0), q.pos(b[j].1), q.pos(b[(j + 1) % m].1));
        let rhombus = [x, x + (y - v), y, v];
        let hit = (0..q.rhombi.len()).any(|r| convex_overlap(&corners(&q, r), &rhombus) > 1e-9);
        if hit {
            return Err(Error::Geometry(
                "the patch is not train-track-convex: a completion rhombus overlaps it".into(),
            ));
        }
        q = extend_patch(&q, &[rhombus])?;
    }
}
