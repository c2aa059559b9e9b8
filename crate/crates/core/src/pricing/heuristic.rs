use std::time::Instant;

use super::{
    auto_penalties, build_qubo, pile_weights, qubo_to_ising, repair, vertex_weights, Backend,
    PricedColumn, PricingConfig, PricingError, PricingResult,
};
use crate::graph::ConflictGraph;
use crate::master::{reduced_cost, Column, DualPrices};
use crate::qaia::{solve_bsb, solve_simcim, QaiaConfig};

/// Heuristic pricing through the QUBO model. An empty result proves nothing;
/// callers must fall back to [`super::price_exact`].
pub fn price_qaia(
    duals: &DualPrices,
    graph: &ConflictGraph,
    cfg: &PricingConfig,
    qaia: &QaiaConfig,
    backend: Backend,
) -> Result<PricingResult, PricingError> {
    let started = Instant::now();
    let piles = duals.piles;
    let weights = vertex_weights(duals, graph);
    let (auto1, auto2) = auto_penalties(&weights.gain, graph, piles);
    let lambda1 = if cfg.lambda1 > 0.0 { cfg.lambda1 } else { auto1 };
    let lambda2 = if cfg.lambda2 > 0.0 { cfg.lambda2 } else { auto2 };
    let qubo = build_qubo(&weights.gain, graph, piles, lambda1, lambda2)?;
    let ising = qubo_to_ising(&qubo);
    let run_cfg = QaiaConfig {
        restarts: cfg.restarts,
        ..qaia.clone()
    };
    let spins = match backend {
        Backend::Bsb => solve_bsb(&ising, &run_cfg)?,
        Backend::SimCim => solve_simcim(&ising, &run_cfg)?,
        Backend::Exact => return Err(PricingError::NotHeuristic),
    };
    let per_pile: Vec<Vec<f64>> = (0..piles)
        .map(|c| pile_weights(&weights, duals, graph, c))
        .collect();
    let mut columns = Vec::new();
    for restart in &spins.restart_spins {
        let raw: Vec<bool> = restart.iter().map(|&s| s > 0).collect();
        let Some(col) = repair(&raw, &qubo.var_map, &weights.gain, graph, cfg.rc_eps) else {
            continue;
        };
        for (pile, w) in per_pile.iter().enumerate() {
            let column = polish(&col, w, graph);
            if column.is_empty() {
                continue;
            }
            let rc = reduced_cost(&column, graph, duals, pile);
            if rc < -cfg.rc_eps {
                columns.push(PricedColumn {
                    column,
                    pile,
                    reduced_cost: rc,
                });
            }
        }
    }
    Ok(PricingResult::finish(
        columns,
        cfg.max_cols,
        cfg.alpha,
        backend,
        started.elapsed(),
    ))
}

/// Drops members with non-positive pile weight, then greedily adds the
/// heaviest compatible vertices.
fn polish(col: &Column, w: &[f64], graph: &ConflictGraph) -> Column {
    let mut set: Vec<usize> = col.vertices().iter().copied().filter(|&v| w[v] > 0.0).collect();
    let mut used = vec![false; graph.num_partition_slots()];
    for &v in &set {
        used[graph.partition(v)] = true;
    }
    let mut extra: Vec<usize> = graph
        .alive_vertices()
        .filter(|&v| w[v] > 0.0 && !used[graph.partition(v)])
        .collect();
    extra.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    for v in extra {
        let p = graph.partition(v);
        if !used[p] && set.iter().all(|&u| !graph.has_edge(u, v)) {
            used[p] = true;
            set.push(v);
        }
    }
    Column::new(set)
}
