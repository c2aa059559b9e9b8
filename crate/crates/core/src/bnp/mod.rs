//! Best-first branch-and-price: column generation at every node, vertex and
//! pair branching, incumbent tracking and run statistics.

mod branch;
mod coloring;

pub use branch::{
    diff_child, discard_child, inherit_pool, pair_candidate, pile_conflict_candidate, same_child,
    select_child, vertex_candidate, Branching, MASS_TOL,
};
pub use coloring::color_within;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::config::SolverConfig;
use crate::graph::{build_conflict_graph, ConflictGraph, GraphError};
use crate::instance::{makespan, selection_fits_piles, Instance, InstanceError};
use crate::lp::{LpAudit, LpError};
use crate::master::{initial_columns, Column, DualPrices, MasterError, Rmp, RmpSolution};
use crate::pricing::{price_exact, price_qaia, Backend, PricedColumn};
use crate::qaia::QaiaConfig;

/// Integer rounding slack for node bounds.
const BOUND_EPS: f64 = 1e-6;
/// Largest KKT residual tolerated when auditing.
pub const AUDIT_TOL: f64 = 1e-6;
/// Offset between the QAIA seeds of consecutive pricing calls.
const SEED_STRIDE: u64 = 1_000_003;

#[derive(Debug, Error)]
pub enum BnpError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("node {node}: LP audit violation {violation:e}")]
    Audit { node: usize, violation: f64 },
    #[error("node {node}: decoded schedule is infeasible: {reason}")]
    Decode { node: usize, reason: String },
    #[error("node {0}: fractional solution without a branching candidate")]
    NoBranch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Best schedule found, on the original instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    /// Chosen interval of each vehicle.
    pub selection: Vec<usize>,
    /// Pile of each vehicle's interval.
    pub piles: Vec<usize>,
    pub makespan: u32,
    pub found_at_node: usize,
    pub found_at: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub obj: Option<u32>,
    pub gap_percent: f64,
    /// Global lower bound at termination, rounded up to an integer.
    pub lower_bound: Option<u32>,
    pub root_bound: Option<f64>,
    pub t_total: Duration,
    pub t_rmp: Duration,
    pub t_pricing: Duration,
    pub n_pricing_heuristic: usize,
    pub n_pricing_exact: usize,
    /// Distinct columns that entered any RMP, singletons included.
    pub n_columns: usize,
    /// Nodes whose RMP was solved to optimality at least once.
    pub n_nodes: usize,
    pub status: SolveStatus,
    /// Worst KKT residuals over all RMP solves; only kept when auditing.
    pub lp_audit: Option<LpAudit>,
}

impl SolveStats {
    pub fn n_pricing(&self) -> usize {
        self.n_pricing_heuristic + self.n_pricing_exact
    }
}

/// A branching step: the node graph and the graphs of its two children.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    pub node: usize,
    pub branching: Branching,
    pub parent: ConflictGraph,
    /// Select/discard or diff/same, in that order; `None` for a child that
    /// was infeasible on creation.
    pub children: [Option<ConflictGraph>; 2],
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub incumbent: Option<Incumbent>,
    pub stats: SolveStats,
    pub branches: Vec<BranchRecord>,
}

struct Node {
    id: usize,
    bound: f64,
    graph: ConflictGraph,
    pool: Vec<Column>,
}

struct Open {
    node: Node,
    seq: u64,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // BinaryHeap pops the maximum: lowest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .node
            .bound
            .total_cmp(&self.node.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

enum NodeResult {
    Done,
    Interrupted(Node),
    Branched(Vec<Node>),
}

enum ColumnGeneration {
    Converged(Box<(Rmp, RmpSolution)>),
    Infeasible,
    Interrupted,
}

struct Search<'a> {
    inst: &'a Instance,
    cfg: &'a SolverConfig,
    started: Instant,
    incumbent: Option<Incumbent>,
    root_bound: Option<f64>,
    t_rmp: Duration,
    t_pricing: Duration,
    n_heuristic: usize,
    n_exact: usize,
    n_nodes: usize,
    column_keys: HashSet<Vec<Vec<usize>>>,
    audit: Option<LpAudit>,
    branches: Vec<BranchRecord>,
    next_id: usize,
}

/// Solves `inst` to optimality or until the time limit.
pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<SolveOutcome, BnpError> {
    inst.validate()?;
    let mut search = Search {
        inst,
        cfg,
        started: Instant::now(),
        incumbent: None,
        root_bound: None,
        t_rmp: Duration::ZERO,
        t_pricing: Duration::ZERO,
        n_heuristic: 0,
        n_exact: 0,
        n_nodes: 0,
        column_keys: HashSet::new(),
        audit: cfg.audit_lp.then(LpAudit::default),
        branches: Vec::new(),
        next_id: 1,
    };
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    open.push(Open {
        node: Node {
            id: 0,
            bound: 0.0,
            graph: build_conflict_graph(inst),
            pool: Vec::new(),
        },
        seq,
    });
    let mut timed_out = false;
    while let Some(Open { node, .. }) = open.pop() {
        if search.out_of_time() {
            seq += 1;
            open.push(Open { node, seq });
            timed_out = true;
            break;
        }
        if search.prunes(node.bound) {
            continue;
        }
        match search.process(node)? {
            NodeResult::Done => {}
            NodeResult::Interrupted(node) => {
                seq += 1;
                open.push(Open { node, seq });
                timed_out = true;
                break;
            }
            NodeResult::Branched(children) => {
                for node in children {
                    seq += 1;
                    open.push(Open { node, seq });
                }
            }
        }
    }
    let best = search.incumbent.as_ref().map(|i| i.makespan);
    let status = match (timed_out, best) {
        (true, _) => SolveStatus::TimeLimit,
        (false, Some(_)) => SolveStatus::Optimal,
        (false, None) => SolveStatus::Infeasible,
    };
    let open_bound = open
        .iter()
        .map(|o| o.node.bound)
        .fold(f64::INFINITY, f64::min);
    let lower_bound = match status {
        SolveStatus::Optimal => best,
        SolveStatus::Infeasible => None,
        SolveStatus::TimeLimit => {
            let lb = rounded_bound(open_bound);
            Some(best.map_or(lb, |b| lb.min(b)))
        }
    };
    let gap_percent = match (status, best) {
        (SolveStatus::Optimal, _) => 0.0,
        (SolveStatus::TimeLimit, Some(ub)) => gap_percent(ub, open_bound),
        _ => 100.0,
    };
    let stats = SolveStats {
        obj: best,
        gap_percent,
        lower_bound,
        root_bound: search.root_bound,
        t_total: search.started.elapsed(),
        t_rmp: search.t_rmp,
        t_pricing: search.t_pricing,
        n_pricing_heuristic: search.n_heuristic,
        n_pricing_exact: search.n_exact,
        n_columns: search.column_keys.len(),
        n_nodes: search.n_nodes,
        status,
        lp_audit: search.audit,
    };
    Ok(SolveOutcome {
        incumbent: search.incumbent,
        stats,
        branches: search.branches,
    })
}

fn rounded_bound(bound: f64) -> u32 {
    (bound - BOUND_EPS).ceil().max(0.0) as u32
}

/// `100·(ub − ⌈lb⌉)/ub` clamped to `[0, 100]`; completions are integers, so
/// the bound may be rounded up.
pub fn gap_percent(upper: u32, lower: f64) -> f64 {
    if upper == 0 {
        return 0.0;
    }
    let lb = f64::from(rounded_bound(lower).min(upper));
    (100.0 * (f64::from(upper) - lb) / f64::from(upper)).clamp(0.0, 100.0)
}

impl Search<'_> {
    fn out_of_time(&self) -> bool {
        self.started.elapsed() >= self.cfg.time_limit
    }

    /// A node cannot beat the incumbent once its rounded bound reaches it.
    fn prunes(&self, bound: f64) -> bool {
        self.incumbent
            .as_ref()
            .is_some_and(|inc| (bound - BOUND_EPS).ceil() >= f64::from(inc.makespan))
    }

    fn process(&mut self, mut node: Node) -> Result<NodeResult, BnpError> {
        // An improving schedule only uses intervals that end before the incumbent.
        if let Some(best) = self.incumbent.as_ref().map(|i| i.makespan) {
            let late: Vec<usize> = node
                .graph
                .alive_vertices()
                .filter(|&v| node.graph.completion(v) >= best)
                .collect();
            for v in late {
                node.graph.remove_vertex(v)?;
            }
        }
        node.pool = inherit_pool(&node.pool, &node.graph);
        let members = node.graph.partition_members();
        if node.graph.active_partitions().iter().any(|&p| members[p].is_empty()) {
            return Ok(NodeResult::Done);
        }
        let (rmp, sol) = match self.column_generation(&node)? {
            ColumnGeneration::Converged(done) => *done,
            ColumnGeneration::Infeasible => return Ok(NodeResult::Done),
            ColumnGeneration::Interrupted => return Ok(NodeResult::Interrupted(node)),
        };
        let bound = sol.objective;
        if node.id == 0 {
            self.root_bound = Some(bound);
        }
        if self.prunes(bound) {
            return Ok(NodeResult::Done);
        }
        let graph = &node.graph;
        let report = rmp.fractional_report(&sol.zeta);
        if report.integral {
            let mut assignment = Vec::new();
            for (col, z) in rmp.columns().iter().zip(&sol.zeta) {
                for (pile, &value) in z.iter().enumerate() {
                    if value > 0.5 {
                        assignment.extend(col.vertices().iter().map(|&v| (v, pile)));
                    }
                }
            }
            let inc = self.decode(graph, &assignment, node.id)?;
            self.offer(inc);
            return Ok(NodeResult::Done);
        }
        let masses_integral = graph.alive_vertices().all(|v| {
            let m = report.vertex_mass[v];
            m.abs() <= MASS_TOL || (m - 1.0).abs() <= MASS_TOL
        });
        let mut selection = Vec::new();
        if masses_integral {
            selection = graph
                .alive_vertices()
                .filter(|&v| report.vertex_mass[v] > 0.5)
                .collect();
            if let Some(colors) = color_within(graph, &selection, self.inst.piles) {
                let assignment: Vec<(usize, usize)> =
                    selection.iter().copied().zip(colors).collect();
                let inc = self.decode(graph, &assignment, node.id)?;
                self.offer(inc);
                return Ok(NodeResult::Done);
            }
        }
        let branching = if let Some(vertex) = vertex_candidate(graph, &report) {
            Branching::Vertex { vertex }
        } else if let Some((u, v)) = pair_candidate(&report) {
            Branching::Pair { u, v }
        } else if masses_integral {
            match pile_conflict_candidate(graph, &selection) {
                Some(vertex) => Branching::PileConflict { vertex },
                // every partition is down to one vertex and they do not fit
                None => return Ok(NodeResult::Done),
            }
        } else {
            return Err(BnpError::NoBranch(node.id));
        };
        let children = match branching {
            Branching::Vertex { vertex } | Branching::PileConflict { vertex } => {
                [Some(select_child(graph, vertex)?), discard_child(graph, vertex)?]
            }
            Branching::Pair { u, v } => [Some(diff_child(graph, u, v)?), Some(same_child(graph, u, v)?.0)],
        };
        log::debug!("node {} bound {bound:.4}: {branching:?}", node.id);
        if self.cfg.record_branches {
            self.branches.push(BranchRecord {
                node: node.id,
                branching,
                parent: graph.clone(),
                children: children.clone(),
            });
        }
        let mut out = Vec::new();
        for g in children.into_iter().flatten() {
            let pool = inherit_pool(rmp.columns(), &g);
            out.push(Node {
                id: self.next_id,
                bound,
                graph: g,
                pool,
            });
            self.next_id += 1;
        }
        Ok(NodeResult::Branched(out))
    }

    fn column_generation(&mut self, node: &Node) -> Result<ColumnGeneration, BnpError> {
        let mut pool = node.pool.clone();
        pool.extend(initial_columns(&node.graph));
        let mut rmp = match Rmp::build(&node.graph, self.inst.piles, &pool, self.cfg.lazy_row_threshold) {
            Ok(rmp) => rmp,
            Err(MasterError::Uncovered(_)) => return Ok(ColumnGeneration::Infeasible),
            Err(e) => return Err(e.into()),
        };
        for col in rmp.columns() {
            self.register(&node.graph, col);
        }
        let mut first = true;
        loop {
            let t = Instant::now();
            let solved = rmp.solve(&self.cfg.lp);
            self.t_rmp += t.elapsed();
            let sol = match solved {
                Ok(sol) => sol,
                Err(MasterError::Lp(LpError::Infeasible)) => return Ok(ColumnGeneration::Infeasible),
                Err(e) => return Err(e.into()),
            };
            if first {
                self.n_nodes += 1;
                first = false;
            }
            if self.audit.is_some() {
                self.check_audit(node.id, rmp.audit(&sol))?;
            }
            if self.out_of_time() {
                return Ok(ColumnGeneration::Interrupted);
            }
            let t = Instant::now();
            let priced = self.price(&sol.duals, &node.graph);
            self.t_pricing += t.elapsed();
            if priced.is_empty() {
                return Ok(ColumnGeneration::Converged(Box::new((rmp, sol))));
            }
            for pc in priced {
                self.register(&node.graph, &pc.column);
                rmp.add_column(pc.column)?;
            }
        }
    }

    /// Heuristic pricing first when configured; the exact pricer runs
    /// whenever the heuristic comes back empty or fails.
    fn price(&mut self, duals: &DualPrices, graph: &ConflictGraph) -> Vec<PricedColumn> {
        let pricing = &self.cfg.pricing;
        if pricing.backend != Backend::Exact {
            let qaia = QaiaConfig {
                seed: self
                    .cfg
                    .qaia
                    .seed
                    .wrapping_add((self.n_heuristic as u64).wrapping_mul(SEED_STRIDE)),
                ..self.cfg.qaia.clone()
            };
            self.n_heuristic += 1;
            match price_qaia(duals, graph, pricing, &qaia, pricing.backend) {
                Ok(r) if !r.columns.is_empty() => return r.columns,
                Ok(_) => {}
                Err(e) => log::warn!("heuristic pricing failed, falling back: {e}"),
            }
        }
        self.n_exact += 1;
        price_exact(duals, graph, pricing).columns
    }

    fn register(&mut self, graph: &ConflictGraph, col: &Column) {
        let key: Vec<Vec<usize>> = col.vertices().iter().map(|&v| graph.members(v).to_vec()).collect();
        self.column_keys.insert(key);
    }

    fn check_audit(&mut self, node: usize, a: LpAudit) -> Result<(), BnpError> {
        let worst = self.audit.get_or_insert_with(LpAudit::default);
        worst.primal_infeasibility = worst.primal_infeasibility.max(a.primal_infeasibility);
        worst.dual_sign_violation = worst.dual_sign_violation.max(a.dual_sign_violation);
        worst.reduced_cost_violation = worst.reduced_cost_violation.max(a.reduced_cost_violation);
        worst.complementary_slackness = worst.complementary_slackness.max(a.complementary_slackness);
        worst.duality_gap = worst.duality_gap.max(a.duality_gap);
        let violation = a.max_violation();
        if violation > AUDIT_TOL {
            return Err(BnpError::Audit { node, violation });
        }
        Ok(())
    }

    /// Maps `(slot, pile)` pairs back to one interval and pile per vehicle and
    /// re-checks the schedule on the original instance.
    fn decode(
        &self,
        graph: &ConflictGraph,
        assignment: &[(usize, usize)],
        node: usize,
    ) -> Result<Incumbent, BnpError> {
        let fail = |reason: String| BnpError::Decode { node, reason };
        let vehicles = self.inst.num_vehicles();
        let mut selection = vec![usize::MAX; vehicles];
        let mut piles = vec![usize::MAX; vehicles];
        for &(v, pile) in assignment {
            if pile >= self.inst.piles {
                return Err(fail(format!("pile {pile} out of range")));
            }
            for &orig in graph.members(v) {
                let vehicle = self.inst.vertices[orig].vehicle;
                if selection[vehicle] != usize::MAX {
                    return Err(fail(format!("vehicle {vehicle} scheduled twice")));
                }
                selection[vehicle] = orig;
                piles[vehicle] = pile;
            }
        }
        if let Some(vehicle) = selection.iter().position(|&s| s == usize::MAX) {
            return Err(fail(format!("vehicle {vehicle} unscheduled")));
        }
        for a in 0..vehicles {
            for b in (a + 1)..vehicles {
                let (ia, ib) = (&self.inst.vertices[selection[a]], &self.inst.vertices[selection[b]]);
                if piles[a] == piles[b] && ia.overlaps(ib) {
                    return Err(fail(format!("vehicles {a} and {b} overlap on pile {}", piles[a])));
                }
            }
        }
        if !selection_fits_piles(self.inst, &selection) {
            return Err(fail("pile capacity exceeded".to_string()));
        }
        Ok(Incumbent {
            makespan: makespan(self.inst, &selection)?,
            selection,
            piles,
            found_at_node: node,
            found_at: self.started.elapsed(),
        })
    }

    fn offer(&mut self, inc: Incumbent) {
        if self.incumbent.as_ref().is_none_or(|cur| inc.makespan < cur.makespan) {
            log::info!("node {}: incumbent {}", inc.found_at_node, inc.makespan);
            self.incumbent = Some(inc);
        }
    }
}
