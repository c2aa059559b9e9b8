use crate::graph::{ConflictGraph, GraphError};
use crate::master::{Column, FractionalReport};

/// Masses within this distance of 0 or 1 count as integral.
pub const MASS_TOL: f64 = 1e-6;

/// Which dichotomy split a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branching {
    /// Select `vertex` (forbidding its siblings) versus forbid it. Chosen from
    /// fractional vertex masses.
    Vertex { vertex: usize },
    /// Different piles (new edge) versus same pile (contraction).
    Pair { u: usize, v: usize },
    /// Select versus forbid, used when the selection is integral but cannot
    /// be split over the piles.
    PileConflict { vertex: usize },
}

/// Vertex rule: the partition with the most positive-mass vertices (at
/// least two, ties to the lowest index), then its heaviest vertex (ties to
/// the lowest id).
pub fn vertex_candidate(graph: &ConflictGraph, report: &FractionalReport) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for p in graph.active_partitions() {
        let positive = graph
            .alive_in_partition(p)
            .into_iter()
            .filter(|&v| report.vertex_mass[v] > MASS_TOL)
            .count();
        if positive >= 2 && best.is_none_or(|(_, count)| positive > count) {
            best = Some((p, positive));
        }
    }
    let (p, _) = best?;
    graph
        .alive_in_partition(p)
        .into_iter()
        .fold(None, |acc: Option<usize>, v| match acc {
            Some(a) if report.vertex_mass[a] >= report.vertex_mass[v] => Some(a),
            _ => Some(v),
        })
}

/// Pair rule: the pair whose co-occurrence mass is largest while strictly
/// fractional, ties to the lexicographically smallest pair.
pub fn pair_candidate(report: &FractionalReport) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for (&pair, &mass) in &report.pair_mass {
        if mass <= MASS_TOL || mass >= 1.0 - MASS_TOL {
            continue;
        }
        let better = match best {
            None => true,
            Some((bp, bm)) => mass > bm || (mass == bm && pair < bp),
        };
        if better {
            best = Some((pair, mass));
        }
    }
    best.map(|(pair, _)| pair)
}

/// Vertex of `selection` with the most neighbours inside it whose partition
/// still has an alternative, ties to the lowest id.
pub fn pile_conflict_candidate(graph: &ConflictGraph, selection: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for &v in selection {
        if graph.alive_in_partition(graph.partition(v)).len() < 2 {
            continue;
        }
        let deg = selection.iter().filter(|&&u| graph.has_edge(u, v)).count();
        if best.is_none_or(|(b, d)| deg > d || (deg == d && v < b)) {
            best = Some((v, deg));
        }
    }
    best.map(|(v, _)| v)
}

/// `v` fixed: every other vertex of its partition is removed.
pub fn select_child(graph: &ConflictGraph, v: usize) -> Result<ConflictGraph, GraphError> {
    let mut g = graph.clone();
    for w in graph.alive_in_partition(graph.partition(v)) {
        if w != v {
            g.remove_vertex(w)?;
        }
    }
    Ok(g)
}

/// `v` forbidden. `None` when that leaves its partition without a vertex.
pub fn discard_child(graph: &ConflictGraph, v: usize) -> Result<Option<ConflictGraph>, GraphError> {
    let mut g = graph.clone();
    g.remove_vertex(v)?;
    Ok((!g.alive_in_partition(g.partition(v)).is_empty()).then_some(g))
}

/// `u` and `v` may not share a pile.
pub fn diff_child(graph: &ConflictGraph, u: usize, v: usize) -> Result<ConflictGraph, GraphError> {
    let mut g = graph.clone();
    g.add_edge(u, v)?;
    Ok(g)
}

/// `u` and `v` are both selected on one pile: they become a super-vertex and
/// every other vertex of their two partitions goes away.
pub fn same_child(graph: &ConflictGraph, u: usize, v: usize) -> Result<(ConflictGraph, usize), GraphError> {
    let mut g = graph.clone();
    let z = g.contract(u, v)?;
    for w in g.alive_in_partition(g.partition(z)) {
        if w != z {
            g.remove_vertex(w)?;
        }
    }
    Ok((g, z))
}

/// Alive vertex of `graph` that slot `v` turned into, if any.
fn current_slot(graph: &ConflictGraph, mut v: usize) -> Option<usize> {
    while !graph.is_alive(v) {
        v = graph.merged_into(v)?;
    }
    Some(v)
}

/// Parent columns carried into a child: members follow contractions, and a
/// column survives only if it is still independent there.
pub fn inherit_pool(columns: &[Column], child: &ConflictGraph) -> Vec<Column> {
    let mut out = Vec::new();
    'cols: for col in columns {
        let mut vs = Vec::with_capacity(col.len());
        for &v in col.vertices() {
            match current_slot(child, v) {
                Some(w) => vs.push(w),
                None => continue 'cols,
            }
        }
        vs.sort_unstable();
        vs.dedup();
        if child.is_independent(&vs) {
            out.push(Column::new(vs));
        }
    }
    out
}
