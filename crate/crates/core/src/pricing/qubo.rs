use std::collections::BTreeMap;

use super::PricingError;
use crate::graph::ConflictGraph;
use crate::qaia::{CompensatedSum, IsingModel};

/// Pricing QUBO over binaries `x_{v,c}`:
///
/// `H = −Σ w_v x_{v,c} + λ1 Σ_n (Σ_{v∈P_n,c} x_{v,c} − 1)² + λ2 Σ_{(u,v)∈E} Σ_c x_{u,c} x_{v,c}`.
///
/// Stored as linear terms, upper-triangle pair coefficients (the coefficient
/// of `x_i x_j`, i.e. `2 Q_ij`) and a constant.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    /// `(vertex, pile)` of each binary; vertex-major, piles inner.
    pub var_map: Vec<(usize, usize)>,
    pub linear: Vec<f64>,
    pub pairs: Vec<(usize, usize, f64)>,
    pub constant: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    piles: usize,
    index_of_vertex: Vec<usize>,
}

impl QuboModel {
    /// A raw QUBO over `linear.len()` binaries, each mapped to `(i, 0)`.
    pub fn from_terms(linear: Vec<f64>, pairs: Vec<(usize, usize, f64)>, constant: f64) -> Self {
        let n = linear.len();
        QuboModel {
            var_map: (0..n).map(|i| (i, 0)).collect(),
            linear,
            pairs: pairs.into_iter().map(|(i, j, q)| (i.min(j), i.max(j), q)).collect(),
            constant,
            lambda1: 0.0,
            lambda2: 0.0,
            piles: 1,
            index_of_vertex: (0..n).collect(),
        }
    }

    pub fn num_binaries(&self) -> usize {
        self.var_map.len()
    }

    pub fn index(&self, vertex: usize, pile: usize) -> Option<usize> {
        let k = *self.index_of_vertex.get(vertex)?;
        (k != usize::MAX && pile < self.piles).then_some(k * self.piles + pile)
    }

    /// `xᵀQx + lᵀx + const`.
    pub fn energy(&self, x: &[bool]) -> f64 {
        let mut e = CompensatedSum::default();
        e.add(self.constant);
        for (i, &l) in self.linear.iter().enumerate() {
            if x[i] {
                e.add(l);
            }
        }
        for &(i, j, q) in &self.pairs {
            if x[i] && x[j] {
                e.add(q);
            }
        }
        e.value()
    }

    /// Dense symmetric `Q` with zero diagonal (diagonal terms live in the
    /// linear part since `x² = x`).
    pub fn q_matrix(&self) -> Vec<f64> {
        let n = self.num_binaries();
        let mut q = vec![0.0; n * n];
        for &(i, j, v) in &self.pairs {
            q[i * n + j] += v / 2.0;
            q[j * n + i] += v / 2.0;
        }
        q
    }
}

/// Default penalties: `λ1 = 2·(max|w|·min(|V|, 2C) + 1)` and `λ2 = 2·λ1`.
/// `λ2` must exceed `λ1 + max|w|`, otherwise keeping both ends of a conflict
/// edge can beat dropping one and paying the empty-partition penalty.
pub fn auto_penalties(weights: &[f64], graph: &ConflictGraph, piles: usize) -> (f64, f64) {
    let max_w = graph
        .alive_vertices()
        .map(|v| weights[v].abs())
        .fold(0.0, f64::max);
    let count = graph.num_alive().min(2 * piles) as f64;
    let l1 = 2.0 * (max_w * count + 1.0);
    (l1, 2.0 * l1)
}

pub fn build_qubo(
    weights: &[f64],
    graph: &ConflictGraph,
    piles: usize,
    lambda1: f64,
    lambda2: f64,
) -> Result<QuboModel, PricingError> {
    if !(lambda1 > 0.0 && lambda2 > 0.0) {
        return Err(PricingError::Penalty(lambda1, lambda2));
    }
    if graph.alive_vertices().any(|v| !weights[v].is_finite()) || !lambda1.is_finite() || !lambda2.is_finite() {
        return Err(PricingError::NonFinite);
    }
    let alive: Vec<usize> = graph.alive_vertices().collect();
    let mut index_of_vertex = vec![usize::MAX; graph.num_slots()];
    let mut var_map = Vec::with_capacity(alive.len() * piles);
    for (k, &v) in alive.iter().enumerate() {
        index_of_vertex[v] = k;
        for c in 0..piles {
            var_map.push((v, c));
        }
    }
    let idx = |v: usize, c: usize| index_of_vertex[v] * piles + c;
    let mut linear: Vec<f64> = var_map.iter().map(|&(v, _)| -weights[v]).collect();
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut add_pair = |i: usize, j: usize, q: f64| {
        *pairs.entry((i.min(j), i.max(j))).or_insert(0.0) += q;
    };
    let mut constant = 0.0;
    let members = graph.partition_members();
    for p in graph.active_partitions() {
        let vars: Vec<usize> = members[p]
            .iter()
            .flat_map(|&v| (0..piles).map(move |c| (v, c)))
            .map(|(v, c)| idx(v, c))
            .collect();
        constant += lambda1;
        for (a, &i) in vars.iter().enumerate() {
            linear[i] -= lambda1;
            for &j in &vars[a + 1..] {
                add_pair(i, j, 2.0 * lambda1);
            }
        }
    }
    for (u, v) in graph.edges() {
        for c in 0..piles {
            add_pair(idx(u, c), idx(v, c), lambda2);
        }
    }
    Ok(QuboModel {
        var_map,
        linear,
        pairs: pairs.into_iter().map(|((i, j), q)| (i, j, q)).collect(),
        constant,
        lambda1,
        lambda2,
        piles,
        index_of_vertex,
    })
}

/// Substitutes `x = (1 + σ)/2`.
pub fn qubo_to_ising(q: &QuboModel) -> IsingModel {
    let n = q.num_binaries();
    let mut h: Vec<CompensatedSum> = vec![CompensatedSum::default(); n];
    let mut offset = CompensatedSum::default();
    offset.add(q.constant);
    for (i, &l) in q.linear.iter().enumerate() {
        h[i].add(l / 2.0);
        offset.add(l / 2.0);
    }
    let mut couplings = Vec::with_capacity(q.pairs.len());
    for &(i, j, v) in &q.pairs {
        let quarter = v / 4.0;
        couplings.push((i, j, quarter));
        h[i].add(quarter);
        h[j].add(quarter);
        offset.add(quarter);
    }
    let h = h.iter().map(CompensatedSum::value).collect();
    IsingModel::from_couplings(n, &couplings, h, offset.value())
        .expect("QUBO coefficients are finite and off-diagonal")
}
