use crate::graph::ConflictGraph;
use crate::master::Column;

/// Turns an arbitrary binary assignment into a column, or nothing.
///
/// A vertex counts as selected if any of its pile copies is set. Selected
/// vertices are then kept greedily by decreasing weight (ties to the lower
/// id) unless a kept neighbour or a kept vertex of the same partition is
/// already present. The result is dropped when its total weight does not
/// exceed `rc_eps`, i.e. when it cannot price out.
pub fn repair(
    raw: &[bool],
    var_map: &[(usize, usize)],
    weights: &[f64],
    graph: &ConflictGraph,
    rc_eps: f64,
) -> Option<Column> {
    let mut selected: Vec<usize> = raw
        .iter()
        .zip(var_map)
        .filter(|&(&bit, &(v, _))| bit && v < graph.num_slots() && v < weights.len() && graph.is_alive(v))
        .map(|(_, &(v, _))| v)
        .collect();
    selected.sort_unstable();
    selected.dedup();
    selected.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));

    let mut kept: Vec<usize> = Vec::new();
    for v in selected {
        if kept.iter().all(|&u| !graph.has_edge(u, v)) {
            kept.push(v);
        }
    }
    let mut seen = vec![false; graph.num_partition_slots()];
    kept.retain(|&v| !std::mem::replace(&mut seen[graph.partition(v)], true));

    let total: f64 = kept.iter().map(|&v| weights[v]).sum();
    if kept.is_empty() || total.is_nan() || total <= rc_eps {
        return None;
    }
    Some(Column::new(kept))
}
