//! Restricted master problem over a pool of independent sets, each available
//! on every pile.
//!
//! Rows, for a node graph with alive vertices `V`, active partitions `P`,
//! edges `E` and `C` piles:
//!
//! * completion: `Σ_{S∋v} Σ_c e_v ζ_{S,c} − τ ≤ 0` for each `v ∈ V`;
//! * assignment: `Σ_{S∩P_n≠∅} Σ_c ζ_{S,c} = 1` for each partition;
//! * conflict: `Σ_{S∩{u,v}≠∅} ζ_{S,c} ≤ 1` for each edge and pile.
//!
//! Conflict rows are either all materialized or, above a size threshold,
//! separated lazily.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::graph::ConflictGraph;
use crate::lp::{self, Basis, LpAudit, LpError, LpOptions, LpProblem, LpSolution, RowSense};

const NONE: usize = usize::MAX;
const INTEGRAL_TOL: f64 = 1e-6;
const LAZY_VIOLATION_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MasterError {
    #[error("partition {0} has no alive vertex")]
    Uncovered(usize),
    #[error("invalid column {vertices:?}: {reason}")]
    InvalidColumn { vertices: Vec<usize>, reason: String },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// An independent set of node vertices, kept sorted; the sorted vertex list
/// doubles as the deduplication key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Column {
    vertices: Vec<usize>,
}

impl Column {
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Column { vertices }
    }

    pub fn singleton(v: usize) -> Self {
        Column { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn key(&self) -> &[usize] {
        &self.vertices
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Singleton columns for every alive vertex.
pub fn initial_columns(graph: &ConflictGraph) -> Vec<Column> {
    graph.alive_vertices().map(Column::singleton).collect()
}

/// Dual prices split by row family.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPrices {
    /// Completion-row duals by vertex slot (0 for dead slots).
    pub pi: Vec<f64>,
    /// Assignment-row duals by partition slot (0 for absorbed partitions).
    pub lambda: Vec<f64>,
    /// Conflict-row duals as `((u, v), pile, μ)`; rows not in the LP are 0.
    pub mu: Vec<((usize, usize), usize, f64)>,
    /// `Σ_{e∋v} μ_{e,c}` by vertex slot and pile.
    pub incident_mu: Vec<Vec<f64>>,
    pub piles: usize,
}

impl DualPrices {
    /// All-zero prices for `slots` vertices and `partitions` partitions.
    pub fn zero(slots: usize, partitions: usize, piles: usize) -> Self {
        DualPrices {
            pi: vec![0.0; slots],
            lambda: vec![0.0; partitions],
            mu: Vec::new(),
            incident_mu: vec![vec![0.0; piles]; slots],
            piles,
        }
    }
}

/// Exact LP reduced cost of `ζ_{S,pile}`.
pub fn reduced_cost(col: &Column, graph: &ConflictGraph, duals: &DualPrices, pile: usize) -> f64 {
    let mut s = 0.0;
    for &v in col.vertices() {
        s += duals.pi[v] * f64::from(graph.completion(v));
        s += duals.lambda[graph.partition(v)];
        s += duals.incident_mu[v][pile];
    }
    -s
}

/// Vertex and pair masses of an RMP solution.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalReport {
    /// `Σ ζ` over columns containing the vertex, by slot.
    pub vertex_mass: Vec<f64>,
    /// `Σ ζ` over columns containing both vertices, for pairs with positive mass.
    pub pair_mass: HashMap<(usize, usize), f64>,
    /// Every `ζ` is within tolerance of 0 or 1.
    pub integral: bool,
}

#[derive(Debug, Clone)]
pub struct RmpSolution {
    pub objective: f64,
    /// `ζ` values by pool column and pile.
    pub zeta: Vec<Vec<f64>>,
    pub duals: DualPrices,
    pub lp: LpSolution,
    pub lp_solves: usize,
}

#[derive(Debug, Clone)]
pub struct Rmp {
    lp: LpProblem,
    piles: usize,
    tau: usize,
    completion: Vec<u32>,
    partition_of: Vec<usize>,
    vertex_row: Vec<usize>,
    partition_row: Vec<usize>,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
    /// Row of each `(edge, pile)`, `NONE` while not materialized.
    edge_row: Vec<usize>,
    lazy: bool,
    columns: Vec<Column>,
    column_var: Vec<usize>,
    keys: HashSet<Vec<usize>>,
    graph_alive: Vec<bool>,
    adjacency: HashSet<(usize, usize)>,
    basis: Option<Basis>,
}

impl Rmp {
    /// Builds the RMP for `graph` over `pool`. Conflict rows are separated
    /// lazily when `|E|·C` exceeds `lazy_threshold`.
    pub fn build(
        graph: &ConflictGraph,
        piles: usize,
        pool: &[Column],
        lazy_threshold: usize,
    ) -> Result<Self, MasterError> {
        let partitions = graph.partition_members();
        for p in graph.active_partitions() {
            if partitions[p].is_empty() {
                return Err(MasterError::Uncovered(p));
            }
        }
        let slots = graph.num_slots();
        let mut lp = LpProblem::new();
        let tau = lp.add_var(1.0, 0.0, f64::INFINITY)?;
        lp.set_var_name(tau, "tau");
        let mut vertex_row = vec![NONE; slots];
        for v in graph.alive_vertices() {
            let r = lp.add_row(&[(tau, -1.0)], RowSense::Le, 0.0)?;
            lp.set_row_name(r, format!("completion_v{v}"));
            vertex_row[v] = r;
        }
        let mut partition_row = vec![NONE; graph.num_partition_slots()];
        for p in graph.active_partitions() {
            let r = lp.add_row(&[], RowSense::Eq, 1.0)?;
            lp.set_row_name(r, format!("assign_p{p}"));
            partition_row[p] = r;
        }
        let edges = graph.edges();
        let mut incident = vec![Vec::new(); slots];
        for (k, &(u, v)) in edges.iter().enumerate() {
            incident[u].push(k);
            incident[v].push(k);
        }
        let lazy = edges.len() * piles > lazy_threshold;
        let mut edge_row = vec![NONE; edges.len() * piles];
        if !lazy {
            for (k, &(u, v)) in edges.iter().enumerate() {
                for c in 0..piles {
                    let r = lp.add_row(&[], RowSense::Le, 1.0)?;
                    lp.set_row_name(r, format!("conflict_{u}_{v}_c{c}"));
                    edge_row[k * piles + c] = r;
                }
            }
        }
        let mut graph_alive = vec![false; slots];
        for v in graph.alive_vertices() {
            graph_alive[v] = true;
        }
        let adjacency = edges.iter().copied().collect();
        let mut rmp = Rmp {
            lp,
            piles,
            tau,
            completion: (0..slots).map(|v| graph.completion(v)).collect(),
            partition_of: (0..slots).map(|v| graph.partition(v)).collect(),
            vertex_row,
            partition_row,
            edges,
            incident,
            edge_row,
            lazy,
            columns: Vec::new(),
            column_var: Vec::new(),
            keys: HashSet::new(),
            graph_alive,
            adjacency,
            basis: None,
        };
        for col in pool {
            rmp.add_column(col.clone())?;
        }
        Ok(rmp)
    }

    pub fn piles(&self) -> usize {
        self.piles
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn contains_key(&self, key: &[usize]) -> bool {
        self.keys.contains(key)
    }

    pub fn is_lazy(&self) -> bool {
        self.lazy
    }

    pub fn lp(&self) -> &LpProblem {
        &self.lp
    }

    /// Number of conflict rows currently in the LP.
    pub fn num_conflict_rows(&self) -> usize {
        self.edge_row.iter().filter(|&&r| r != NONE).count()
    }

    /// LP variable of `ζ_{col,pile}`.
    pub fn zeta_var(&self, col: usize, pile: usize) -> usize {
        self.column_var[col] + pile
    }

    fn check_column(&self, col: &Column) -> Result<(), String> {
        if col.is_empty() {
            return Err("empty".into());
        }
        let vs = col.vertices();
        for (i, &u) in vs.iter().enumerate() {
            if u >= self.graph_alive.len() || !self.graph_alive[u] {
                return Err(format!("vertex {u} is not alive"));
            }
            for &v in &vs[i + 1..] {
                if self.partition_of[u] == self.partition_of[v] {
                    return Err(format!("vertices {u} and {v} share partition"));
                }
                if self.adjacency.contains(&(u, v)) {
                    return Err(format!("vertices {u} and {v} conflict"));
                }
            }
        }
        Ok(())
    }

    /// Adds `ζ_{S,c}` for every pile. Returns false if the key is pooled.
    pub fn add_column(&mut self, col: Column) -> Result<bool, MasterError> {
        if self.keys.contains(col.key()) {
            return Ok(false);
        }
        self.check_column(&col)
            .map_err(|reason| MasterError::InvalidColumn {
                vertices: col.vertices().to_vec(),
                reason,
            })?;
        let mut base: Vec<(usize, f64)> = Vec::new();
        let mut touched_edges: Vec<usize> = Vec::new();
        for &v in col.vertices() {
            base.push((self.vertex_row[v], f64::from(self.completion[v])));
            base.push((self.partition_row[self.partition_of[v]], 1.0));
            touched_edges.extend_from_slice(&self.incident[v]);
        }
        touched_edges.sort_unstable();
        touched_edges.dedup();
        let first = self.lp.num_vars();
        let index = self.columns.len();
        for c in 0..self.piles {
            let mut entries = base.clone();
            for &k in &touched_edges {
                let r = self.edge_row[k * self.piles + c];
                if r != NONE {
                    entries.push((r, 1.0));
                }
            }
            let j = self.lp.add_column(0.0, 0.0, f64::INFINITY, &entries)?;
            self.lp.set_var_name(j, format!("zeta_s{index}_c{c}"));
        }
        self.keys.insert(col.key().to_vec());
        self.columns.push(col);
        self.column_var.push(first);
        Ok(true)
    }

    fn add_conflict_row(&mut self, k: usize, c: usize) -> Result<(), MasterError> {
        let (u, v) = self.edges[k];
        let mut coeffs = Vec::new();
        for (idx, col) in self.columns.iter().enumerate() {
            if col.contains(u) || col.contains(v) {
                coeffs.push((self.column_var[idx] + c, 1.0));
            }
        }
        let r = self.lp.add_row(&coeffs, RowSense::Le, 1.0)?;
        self.lp.set_row_name(r, format!("conflict_{u}_{v}_c{c}"));
        self.edge_row[k * self.piles + c] = r;
        Ok(())
    }

    /// Solves the LP (warm-started from the previous basis) and, in lazy
    /// mode, separates violated conflict rows until none remains.
    pub fn solve(&mut self, opts: &LpOptions) -> Result<RmpSolution, MasterError> {
        let mut lp_solves = 0;
        loop {
            let sol = lp::solve(&self.lp, self.basis.as_ref(), opts)?;
            lp_solves += 1;
            self.basis = Some(sol.basis.clone());
            let zeta = self.zeta_values(&sol);
            if self.lazy {
                let mut violated = Vec::new();
                for k in 0..self.edges.len() {
                    for c in 0..self.piles {
                        if self.edge_row[k * self.piles + c] == NONE
                            && self.edge_activity(&zeta, k, c) > 1.0 + LAZY_VIOLATION_TOL
                        {
                            violated.push((k, c));
                        }
                    }
                }
                if !violated.is_empty() {
                    for (k, c) in violated {
                        self.add_conflict_row(k, c)?;
                    }
                    continue;
                }
            }
            let duals = self.extract_duals(&sol);
            return Ok(RmpSolution {
                objective: sol.objective,
                zeta,
                duals,
                lp: sol,
                lp_solves,
            });
        }
    }

    fn edge_activity(&self, zeta: &[Vec<f64>], k: usize, c: usize) -> f64 {
        let (u, v) = self.edges[k];
        self.columns
            .iter()
            .zip(zeta)
            .filter(|(col, _)| col.contains(u) || col.contains(v))
            .map(|(_, z)| z[c])
            .sum()
    }

    fn zeta_values(&self, sol: &LpSolution) -> Vec<Vec<f64>> {
        self.column_var
            .iter()
            .map(|&j| (0..self.piles).map(|c| sol.x[j + c]).collect())
            .collect()
    }

    /// Maps row duals back to the three row families.
    pub fn extract_duals(&self, sol: &LpSolution) -> DualPrices {
        let y = &sol.row_duals;
        let pi = self
            .vertex_row
            .iter()
            .map(|&r| if r == NONE { 0.0 } else { y[r] })
            .collect();
        let lambda = self
            .partition_row
            .iter()
            .map(|&r| if r == NONE { 0.0 } else { y[r] })
            .collect();
        let slots = self.vertex_row.len();
        let mut incident_mu = vec![vec![0.0; self.piles]; slots];
        let mut mu = Vec::new();
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            for c in 0..self.piles {
                let r = self.edge_row[k * self.piles + c];
                if r != NONE && y[r] != 0.0 {
                    mu.push(((u, v), c, y[r]));
                    incident_mu[u][c] += y[r];
                    incident_mu[v][c] += y[r];
                }
            }
        }
        DualPrices {
            pi,
            lambda,
            mu,
            incident_mu,
            piles: self.piles,
        }
    }

    /// Vertex and pair masses of a `ζ` assignment indexed like the pool.
    pub fn fractional_report(&self, zeta: &[Vec<f64>]) -> FractionalReport {
        let mut vertex_mass = vec![0.0; self.vertex_row.len()];
        let mut pair_mass: HashMap<(usize, usize), f64> = HashMap::new();
        let mut integral = true;
        for (col, z) in self.columns.iter().zip(zeta) {
            let total: f64 = z.iter().sum();
            for &v in z {
                if v.abs() > INTEGRAL_TOL && (v - 1.0).abs() > INTEGRAL_TOL {
                    integral = false;
                }
            }
            if total <= INTEGRAL_TOL {
                continue;
            }
            let vs = col.vertices();
            for (i, &u) in vs.iter().enumerate() {
                vertex_mass[u] += total;
                for &w in &vs[i + 1..] {
                    *pair_mass.entry((u, w)).or_insert(0.0) += total;
                }
            }
        }
        FractionalReport {
            vertex_mass,
            pair_mass,
            integral,
        }
    }

    /// KKT audit of the last LP solve.
    pub fn audit(&self, sol: &RmpSolution) -> LpAudit {
        lp::audit(&self.lp, &sol.lp)
    }

    /// Index of the `τ` variable in the LP.
    pub fn tau_var(&self) -> usize {
        self.tau
    }

    /// LP text of the current model.
    pub fn to_lp_text(&self) -> String {
        self.lp.to_lp_text()
    }
}
