//! Enumeration oracles shared by unit tests.

use crate::instance::{selection_fits_piles, Instance};

/// Every one-per-vehicle selection, in lexicographic order.
pub(crate) fn all_selections(inst: &Instance) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for part in &inst.partitions {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                part.iter().map(move |&v| {
                    let mut s = prefix.clone();
                    s.push(v);
                    s
                })
            })
            .collect();
    }
    out
}

/// Optimal makespan over pile-feasible selections, `None` if there is none.
pub(crate) fn brute_force_makespan(inst: &Instance) -> Option<u32> {
    all_selections(inst)
        .into_iter()
        .filter(|s| selection_fits_piles(inst, s))
        .map(|s| s.iter().map(|&v| inst.vertices[v].completion).max().unwrap_or(0))
        .min()
}
