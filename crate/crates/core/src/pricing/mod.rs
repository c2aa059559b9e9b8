//! Column pricing: vertex weights from duals, an exact branch-and-bound
//! pricer, and a QUBO route solved by the Ising heuristics.

mod exact;
mod heuristic;
mod qubo;
mod repair;

pub use exact::{max_weight_independent_set, price_exact};
pub use heuristic::price_qaia;
pub use qubo::{auto_penalties, build_qubo, qubo_to_ising, QuboModel};
pub use repair::repair;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::graph::ConflictGraph;
use crate::master::{Column, DualPrices};
use crate::qaia::QaiaError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error("QUBO penalties must be positive, got {0} and {1}")]
    Penalty(f64, f64),
    #[error("non-finite pricing weight or penalty")]
    NonFinite,
    #[error("unknown pricing backend {0:?}")]
    UnknownBackend(String),
    #[error("exact backend has no Ising dynamics")]
    NotHeuristic,
    #[error(transparent)]
    Qaia(#[from] QaiaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Backend {
    Exact,
    Bsb,
    SimCim,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Exact, Backend::Bsb, Backend::SimCim];

    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Bsb => "bsb",
            Backend::SimCim => "simcim",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Backend::Exact),
            "bsb" => Ok(Backend::Bsb),
            "simcim" => Ok(Backend::SimCim),
            _ => Err(PricingError::UnknownBackend(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingConfig {
    pub backend: Backend,
    pub restarts: usize,
    pub max_cols: usize,
    /// Per-pile usage charge; only enters the reported pricing objective.
    pub alpha: f64,
    pub rc_eps: f64,
    /// 0 selects [`auto_penalties`].
    pub lambda1: f64,
    /// 0 selects [`auto_penalties`].
    pub lambda2: f64,
}

impl Default for PricingConfig {
    fn default() -> Self {
        PricingConfig {
            backend: Backend::Exact,
            restarts: 32,
            max_cols: 10,
            alpha: 0.0,
            rc_eps: 1e-6,
            lambda1: 0.0,
            lambda2: 0.0,
        }
    }
}

/// Per-vertex dual contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexWeights {
    /// `π_v e_v − λ_{p(v)}` by slot, 0 for dead slots.
    pub omega: Vec<f64>,
    /// `π_v e_v + λ_{p(v)}` by slot: the amount a vertex lowers the reduced
    /// cost of any column containing it, before conflict-row duals.
    pub gain: Vec<f64>,
}

pub fn vertex_weights(duals: &DualPrices, graph: &ConflictGraph) -> VertexWeights {
    let slots = graph.num_slots();
    let mut omega = vec![0.0; slots];
    let mut gain = vec![0.0; slots];
    for v in graph.alive_vertices() {
        let pe = duals.pi[v] * f64::from(graph.completion(v));
        let lam = duals.lambda[graph.partition(v)];
        omega[v] = pe - lam;
        gain[v] = pe + lam;
    }
    VertexWeights { omega, gain }
}

/// `gain_v + Σ_{e∋v} μ_{e,c}` for every slot: the full per-pile weight whose
/// sum over a column is its negated reduced cost.
pub(crate) fn pile_weights(
    weights: &VertexWeights,
    duals: &DualPrices,
    graph: &ConflictGraph,
    pile: usize,
) -> Vec<f64> {
    let mut w = vec![0.0; graph.num_slots()];
    for v in graph.alive_vertices() {
        w[v] = weights.gain[v] + duals.incident_mu[v][pile];
    }
    w
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedColumn {
    pub column: Column,
    /// Pile whose copy attains `reduced_cost`.
    pub pile: usize,
    pub reduced_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult {
    pub columns: Vec<PricedColumn>,
    /// Most negative reduced cost found, 0 if none.
    pub best_reduced_cost: f64,
    /// Pricing objective of the best column: `−rc − α`.
    pub objective: f64,
    pub backend: Backend,
    pub wall_time: Duration,
}

impl PricingResult {
    pub(crate) fn finish(
        mut columns: Vec<PricedColumn>,
        max_cols: usize,
        alpha: f64,
        backend: Backend,
        wall_time: Duration,
    ) -> Self {
        columns.sort_by(|a, b| {
            a.reduced_cost
                .total_cmp(&b.reduced_cost)
                .then_with(|| a.column.cmp(&b.column))
        });
        let mut seen = std::collections::HashSet::new();
        columns.retain(|c| seen.insert(c.column.clone()));
        columns.truncate(max_cols);
        let best_reduced_cost = columns.first().map_or(0.0, |c| c.reduced_cost);
        let objective = columns.first().map_or(0.0, |c| -c.reduced_cost - alpha);
        PricingResult {
            columns,
            best_reduced_cost,
            objective,
            backend,
            wall_time,
        }
    }
}
