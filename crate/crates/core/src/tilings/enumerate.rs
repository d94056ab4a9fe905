use super::DimerConfig;
use crate::geometry::IsoradialDual;

/// Calls `visit` with the edge ids of every perfect matching of a multigraph.
///
/// Backtracks on the uncovered vertex with the fewest available edges.
pub fn for_each_matching(n: usize, edges: &[(usize, usize)], mut visit: impl FnMut(&[usize])) {
    let mut incident = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        incident[a].push(i);
        incident[b].push(i);
    }
    let mut covered = vec![false; n];
    let mut chosen = Vec::with_capacity(n / 2);
    if n.is_multiple_of(2) {
        recurse(edges, &incident, &mut covered, &mut chosen, &mut visit);
    }
}

fn recurse(
    edges: &[(usize, usize)],
    incident: &[Vec<usize>],
    covered: &mut [bool],
    chosen: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    let mut best: Option<(usize, usize)> = None;
    for v in 0..covered.len() {
        if covered[v] {
            continue;
        }
        let avail = incident[v]
            .iter()
            .filter(|&&e| {
                let (a, b) = edges[e];
                !covered[if a == v { b } else { a }]
            })
            .count();
        if avail == 0 {
            return;
        }
        if best.is_none_or(|(_, c)| avail < c) {
            best = Some((v, avail));
        }
    }
    let Some((v, _)) = best else {
        visit(chosen);
        return;
    };
    for &e in &incident[v] {
        let (a, b) = edges[e];
        let u = if a == v { b } else { a };
        if covered[u] {
            continue;
        }
        covered[v] = true;
        covered[u] = true;
        chosen.push(e);
        recurse(edges, incident, covered, chosen, visit);
        chosen.pop();
        covered[v] = false;
        covered[u] = false;
    }
}

/// All perfect matchings, each as sorted edge ids, in lexicographic order.
pub fn enumerate_matchings(dual: &IsoradialDual) -> Vec<DimerConfig> {
    let edges: Vec<(usize, usize)> = dual.edges.iter().map(|e| (e.w, e.b)).collect();
    let mut out = Vec::new();
    for_each_matching(dual.len(), &edges, |m| out.push(DimerConfig::new(m.to_vec())));
    out.sort();
    out.dedup();
    out
}

pub fn count_matchings(dual: &IsoradialDual) -> usize {
    let edges: Vec<(usize, usize)> = dual.edges.iter().map(|e| (e.w, e.b)).collect();
    let mut count = 0;
    for_each_matching(dual.len(), &edges, |_| count += 1);
    count
}
