//! Linear programming: problem container, a bounded-variable revised simplex
//! with warm starts, and optimality audits.

mod factor;
mod problem;
mod simplex;

pub use problem::{LpProblem, RowSense};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("LP is infeasible")]
    Infeasible,
    #[error("LP is unbounded")]
    Unbounded,
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("numerical trouble: {0}")]
    Numerical(String),
}

/// Simplex status of a variable or of a row's slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

/// A simplex basis usable as a warm start. Missing trailing entries (for
/// columns or rows added later) default to nonbasic columns and basic slacks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Basis {
    pub var_status: Vec<VarStatus>,
    pub row_status: Vec<VarStatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOptions {
    pub feas_tol: f64,
    pub dual_tol: f64,
    pub pivot_tol: f64,
    /// Defaults to ten times rows plus columns.
    pub iteration_limit: Option<usize>,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
    /// Above this many variables plus rows, pricing scans in chunks.
    pub partial_pricing_threshold: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            feas_tol: 1e-7,
            dual_tol: 1e-7,
            pivot_tol: 1e-9,
            iteration_limit: None,
            refactor_every: 100,
            degenerate_limit: 50,
            partial_pricing_threshold: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Simplex multipliers `c_B B^{-1}`, one per row.
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub row_activity: Vec<f64>,
    pub objective: f64,
    pub basis: Basis,
    pub iterations: usize,
}

/// Solves `p` to optimality, optionally from a previous basis.
pub fn solve(p: &LpProblem, warm: Option<&Basis>, opts: &LpOptions) -> Result<LpSolution, LpError> {
    simplex::solve(p, warm, opts)
}

/// Largest violations of the KKT conditions of an LP solution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpAudit {
    pub primal_infeasibility: f64,
    pub dual_sign_violation: f64,
    pub reduced_cost_violation: f64,
    pub complementary_slackness: f64,
    pub duality_gap: f64,
}

impl LpAudit {
    pub fn max_violation(&self) -> f64 {
        self.primal_infeasibility
            .max(self.dual_sign_violation)
            .max(self.reduced_cost_violation)
            .max(self.complementary_slackness)
            .max(self.duality_gap)
    }
}

/// Checks primal feasibility, dual signs and complementary slackness of `sol`.
pub fn audit(p: &LpProblem, sol: &LpSolution) -> LpAudit {
    let mut a = LpAudit::default();
    let act = p.row_activity(&sol.x);
    let mut dual_obj = 0.0;
    for i in 0..p.num_rows() {
        let y = sol.row_duals[i];
        let slack = p.rhs(i) - act[i];
        let (viol, sign_viol) = match p.sense(i) {
            RowSense::Le => ((-slack).max(0.0), y.max(0.0)),
            RowSense::Ge => (slack.max(0.0), (-y).max(0.0)),
            RowSense::Eq => (slack.abs(), 0.0),
        };
        a.primal_infeasibility = a.primal_infeasibility.max(viol);
        a.dual_sign_violation = a.dual_sign_violation.max(sign_viol);
        a.complementary_slackness = a.complementary_slackness.max((y * slack).abs());
        dual_obj += y * p.rhs(i);
    }
    for j in 0..p.num_vars() {
        let (l, u) = p.bounds(j);
        let x = sol.x[j];
        let d = p.cost(j)
            - p.column(j)
                .iter()
                .map(|&(i, v)| sol.row_duals[i] * v)
                .sum::<f64>();
        a.primal_infeasibility = a.primal_infeasibility.max((l - x).max(0.0)).max((x - u).max(0.0));
        let scale = 1e-9 * (1.0 + x.abs());
        let at_lower = l.is_finite() && (x - l).abs() <= scale;
        let at_upper = u.is_finite() && (u - x).abs() <= scale;
        let viol = match (at_lower, at_upper) {
            (true, true) => 0.0,
            (true, false) => (-d).max(0.0),
            (false, true) => d.max(0.0),
            (false, false) => d.abs(),
        };
        a.reduced_cost_violation = a.reduced_cost_violation.max(viol);
        let bound_gap = if at_lower || at_upper { 0.0 } else { 1.0 };
        a.complementary_slackness = a.complementary_slackness.max(viol * bound_gap);
        dual_obj += d * x;
    }
    a.duality_gap = (sol.objective - dual_obj).abs();
    a
}

#[cfg(test)]
mod tests;
