use std::time::Instant;

use super::{pile_weights, vertex_weights, Backend, PricedColumn, PricingConfig, PricingResult};
use crate::graph::ConflictGraph;
use crate::master::{reduced_cost, Column, DualPrices};

/// Maximum-weight set of `graph` vertices that is independent and hits every
/// partition at most once. Only positive weights can help, so only they are
/// searched. Returns the weight and the sorted vertex set (empty set if no
/// weight is positive).
pub fn max_weight_independent_set(graph: &ConflictGraph, weights: &[f64]) -> (f64, Vec<usize>) {
    let mut cand: Vec<usize> = graph.alive_vertices().filter(|&v| weights[v] > 0.0).collect();
    cand.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut search = Search {
        graph,
        weights,
        seen: vec![false; graph.num_partition_slots()],
        current: Vec::new(),
        best_weight: 0.0,
        best: Vec::new(),
    };
    search.dfs(&cand, 0.0);
    let mut best = search.best;
    best.sort_unstable();
    (search.best_weight, best)
}

struct Search<'a> {
    graph: &'a ConflictGraph,
    weights: &'a [f64],
    seen: Vec<bool>,
    current: Vec<usize>,
    best_weight: f64,
    best: Vec<usize>,
}

impl Search<'_> {
    /// Upper bound: the heaviest remaining candidate of each partition.
    /// `cand` is sorted by decreasing weight, so first hits are maxima.
    fn bound(&mut self, cand: &[usize]) -> f64 {
        let mut b = 0.0;
        for &v in cand {
            let p = self.graph.partition(v);
            if !self.seen[p] {
                self.seen[p] = true;
                b += self.weights[v];
            }
        }
        for &v in cand {
            self.seen[self.graph.partition(v)] = false;
        }
        b
    }

    fn dfs(&mut self, cand: &[usize], weight: f64) {
        if cand.is_empty() {
            if weight > self.best_weight {
                self.best_weight = weight;
                self.best.clone_from(&self.current);
            }
            return;
        }
        if weight + self.bound(cand) <= self.best_weight {
            return;
        }
        let v = cand[0];
        let pv = self.graph.partition(v);
        let with: Vec<usize> = cand[1..]
            .iter()
            .copied()
            .filter(|&u| !self.graph.has_edge(u, v) && self.graph.partition(u) != pv)
            .collect();
        self.current.push(v);
        self.dfs(&with, weight + self.weights[v]);
        self.current.pop();
        self.dfs(&cand[1..], weight);
    }
}

/// Best column for every pile's dual profile; exhaustive, so an empty result
/// proves that no column prices out.
pub fn price_exact(duals: &DualPrices, graph: &ConflictGraph, cfg: &PricingConfig) -> PricingResult {
    let started = Instant::now();
    let weights = vertex_weights(duals, graph);
    let mut columns = Vec::new();
    for pile in 0..duals.piles {
        let w = pile_weights(&weights, duals, graph, pile);
        let (value, set) = max_weight_independent_set(graph, &w);
        if value <= cfg.rc_eps || set.is_empty() {
            continue;
        }
        let column = Column::new(set);
        let rc = reduced_cost(&column, graph, duals, pile);
        if rc < -cfg.rc_eps {
            columns.push(PricedColumn {
                column,
                pile,
                reduced_cost: rc,
            });
        }
    }
    PricingResult::finish(columns, usize::MAX, cfg.alpha, Backend::Exact, started.elapsed())
}
