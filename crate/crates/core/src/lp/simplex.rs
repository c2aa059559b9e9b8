//! Bounded-variable primal revised simplex.

use super::factor::{BasisFactor, Repair};
use super::problem::{LpProblem, RowSense};
use super::{Basis, LpError, LpOptions, LpSolution, VarStatus};

const INF: f64 = f64::INFINITY;
const DEGENERATE_STEP: f64 = 1e-12;

struct Simplex<'a> {
    p: &'a LpProblem,
    opts: &'a LpOptions,
    n: usize,
    m: usize,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    status: Vec<VarStatus>,
    x: Vec<f64>,
    basis: Vec<usize>,
    factor: BasisFactor,
    price_offset: usize,
}

fn default_status(lo: f64, up: f64) -> (VarStatus, f64) {
    if lo.is_finite() {
        (VarStatus::AtLower, lo)
    } else if up.is_finite() {
        (VarStatus::AtUpper, up)
    } else {
        (VarStatus::Free, 0.0)
    }
}

fn nonbasic_value(status: VarStatus, lo: f64, up: f64) -> Option<f64> {
    match status {
        VarStatus::AtLower if lo.is_finite() => Some(lo),
        VarStatus::AtUpper if up.is_finite() => Some(up),
        VarStatus::Free if !lo.is_finite() && !up.is_finite() => Some(0.0),
        _ => None,
    }
}

pub(crate) fn solve(
    p: &LpProblem,
    warm: Option<&Basis>,
    opts: &LpOptions,
) -> Result<LpSolution, LpError> {
    let n = p.num_vars();
    let m = p.num_rows();
    let nt = n + m;
    let mut lo = Vec::with_capacity(nt);
    let mut up = Vec::with_capacity(nt);
    let mut cost = Vec::with_capacity(nt);
    for j in 0..n {
        let (l, u) = p.bounds(j);
        lo.push(l);
        up.push(u);
        cost.push(p.cost(j));
    }
    for i in 0..m {
        let (l, u) = match p.sense(i) {
            RowSense::Le => (0.0, INF),
            RowSense::Ge => (-INF, 0.0),
            RowSense::Eq => (0.0, 0.0),
        };
        lo.push(l);
        up.push(u);
        cost.push(0.0);
    }

    let mut status = Vec::with_capacity(nt);
    for j in 0..nt {
        let wanted = warm.and_then(|b| {
            if j < n {
                b.var_status.get(j).copied()
            } else {
                b.row_status.get(j - n).copied()
            }
        });
        let s = match wanted {
            Some(VarStatus::Basic) => VarStatus::Basic,
            Some(s) if nonbasic_value(s, lo[j], up[j]).is_some() => s,
            None if j >= n => VarStatus::Basic,
            _ => default_status(lo[j], up[j]).0,
        };
        status.push(s);
    }
    let mut basis: Vec<usize> = (0..nt).filter(|&j| status[j] == VarStatus::Basic).collect();
    while basis.len() > m {
        let j = basis.pop().expect("nonempty");
        status[j] = default_status(lo[j], up[j]).0;
    }
    if basis.len() < m {
        for i in 0..m {
            if basis.len() == m {
                break;
            }
            if status[n + i] != VarStatus::Basic {
                status[n + i] = VarStatus::Basic;
                basis.push(n + i);
            }
        }
    }

    let mut x = vec![0.0; nt];
    for j in 0..nt {
        if status[j] != VarStatus::Basic {
            x[j] = nonbasic_value(status[j], lo[j], up[j]).expect("sanitized status");
        }
    }
    let (factor, repair) = BasisFactor::new(p, &mut basis);
    let mut s = Simplex {
        p,
        opts,
        n,
        m,
        lo,
        up,
        cost,
        status,
        x,
        basis,
        factor,
        price_offset: 0,
    };
    s.apply_repair(repair);
    s.compute_basic_values();
    s.run()
}

impl Simplex<'_> {
    fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        if j < self.n {
            for &(i, v) in self.p.column(j) {
                a[i] = v;
            }
        } else {
            a[j - self.n] = 1.0;
        }
        a
    }

    fn refactor(&mut self) {
        let (factor, repair) = BasisFactor::new(self.p, &mut self.basis);
        self.factor = factor;
        self.apply_repair(repair);
        self.compute_basic_values();
    }

    fn apply_repair(&mut self, repair: Repair) {
        for (pos, dropped) in repair.replaced {
            let (st, val) = default_status(self.lo[dropped], self.up[dropped]);
            self.status[dropped] = st;
            self.x[dropped] = val;
            self.status[self.basis[pos]] = VarStatus::Basic;
        }
    }

    fn compute_basic_values(&mut self) {
        let mut rhs: Vec<f64> = (0..self.m).map(|i| self.p.rhs(i)).collect();
        for j in 0..self.n {
            if self.status[j] != VarStatus::Basic && self.x[j] != 0.0 {
                for &(i, v) in self.p.column(j) {
                    rhs[i] -= v * self.x[j];
                }
            }
        }
        for i in 0..self.m {
            let j = self.n + i;
            if self.status[j] != VarStatus::Basic {
                rhs[i] -= self.x[j];
            }
        }
        let xb = self.factor.ftran(self.p, &rhs);
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[pos];
        }
    }

    fn reduced_cost(&self, j: usize, cj: f64, y: &[f64]) -> f64 {
        if j < self.n {
            cj - self.p.column(j).iter().map(|&(i, v)| y[i] * v).sum::<f64>()
        } else {
            cj - y[j - self.n]
        }
    }

    fn eligible(&self, j: usize, d: f64) -> Option<f64> {
        let tol = self.opts.dual_tol;
        match self.status[j] {
            VarStatus::Basic => None,
            _ if self.lo[j] == self.up[j] => None,
            VarStatus::AtLower if d < -tol => Some(1.0),
            VarStatus::AtUpper if d > tol => Some(-1.0),
            VarStatus::Free if d.abs() > tol => Some(-d.signum()),
            _ => None,
        }
    }

    /// Chooses the entering variable and its direction.
    fn price(&mut self, y: &[f64], phase1: bool, bland: bool) -> Option<(usize, f64)> {
        let nt = self.n + self.m;
        let cj = |s: &Self, j: usize| if phase1 { 0.0 } else { s.cost[j] };
        if bland {
            return (0..nt).find_map(|j| {
                let d = self.reduced_cost(j, cj(self, j), y);
                self.eligible(j, d).map(|dir| (j, dir))
            });
        }
        let chunk = if nt > self.opts.partial_pricing_threshold {
            (nt / 8).max(self.opts.partial_pricing_threshold / 4).max(1)
        } else {
            nt
        };
        let mut scanned = 0;
        let mut start = self.price_offset % nt.max(1);
        while scanned < nt {
            let len = chunk.min(nt - scanned);
            let mut best: Option<(usize, f64, f64)> = None;
            for t in 0..len {
                let j = (start + t) % nt;
                let d = self.reduced_cost(j, cj(self, j), y);
                if let Some(dir) = self.eligible(j, d) {
                    if best.is_none_or(|(_, _, bd)| d.abs() > bd) {
                        best = Some((j, dir, d.abs()));
                    }
                }
            }
            scanned += len;
            start = (start + len) % nt;
            if let Some((j, dir, _)) = best {
                self.price_offset = start;
                return Some((j, dir));
            }
        }
        None
    }

    fn run(mut self) -> Result<LpSolution, LpError> {
        let limit = self
            .opts
            .iteration_limit
            .unwrap_or(10 * (self.m + self.n));
        let ftol = self.opts.feas_tol;
        let mut iterations = 0usize;
        let mut fresh = true;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if self.factor.num_etas() >= self.opts.refactor_every {
                self.refactor();
                fresh = true;
            }
            let mut phase1 = false;
            let mut cb = vec![0.0; self.m];
            for (pos, &j) in self.basis.iter().enumerate() {
                if self.x[j] < self.lo[j] - ftol {
                    cb[pos] = -1.0;
                    phase1 = true;
                } else if self.x[j] > self.up[j] + ftol {
                    cb[pos] = 1.0;
                    phase1 = true;
                }
            }
            if !phase1 {
                for (pos, &j) in self.basis.iter().enumerate() {
                    cb[pos] = self.cost[j];
                }
            }
            let y = self.factor.btran(self.p, &cb);
            let Some((q, dir)) = self.price(&y, phase1, bland) else {
                if !fresh {
                    self.refactor();
                    fresh = true;
                    continue;
                }
                if phase1 {
                    return Err(LpError::Infeasible);
                }
                return Ok(self.finish(y, iterations));
            };
            iterations += 1;
            if iterations > limit {
                return Err(LpError::IterationLimit(limit));
            }
            let alpha = self.factor.ftran(self.p, &self.column_dense(q));
            let step = self.ratio_test(&alpha, dir, bland);
            let flip_len = self.up[q] - self.lo[q];
            let flip = match step {
                None => flip_len.is_finite(),
                Some((_, theta, _)) => flip_len <= theta,
            };
            if step.is_none() && !flip {
                if !fresh {
                    self.refactor();
                    fresh = true;
                    continue;
                }
                return Err(if phase1 {
                    LpError::Numerical("phase 1 direction without breakpoint".into())
                } else {
                    LpError::Unbounded
                });
            }
            let theta = if flip {
                flip_len
            } else {
                step.expect("checked").1
            };
            if theta > 0.0 {
                self.x[q] += dir * theta;
                for (pos, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        self.x[self.basis[pos]] -= dir * a * theta;
                    }
                }
            }
            if flip {
                if dir > 0.0 {
                    self.status[q] = VarStatus::AtUpper;
                    self.x[q] = self.up[q];
                } else {
                    self.status[q] = VarStatus::AtLower;
                    self.x[q] = self.lo[q];
                }
            } else {
                let (r, _, target) = step.expect("checked");
                let leave = self.basis[r];
                self.x[leave] = target;
                self.status[leave] = if target == self.lo[leave] {
                    VarStatus::AtLower
                } else {
                    VarStatus::AtUpper
                };
                self.basis[r] = q;
                self.status[q] = VarStatus::Basic;
                self.factor.push_eta(r, &alpha);
            }
            fresh = false;
            if theta < DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run > self.opts.degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    /// Returns `(position, step, target value)` of the leaving variable.
    fn ratio_test(&self, alpha: &[f64], dir: f64, bland: bool) -> Option<(usize, f64, f64)> {
        let ftol = self.opts.feas_tol;
        let ptol = self.opts.pivot_tol;
        // (position, exact ratio, harris ratio, target, |alpha|)
        let mut cands: Vec<(usize, f64, f64, f64, f64)> = Vec::new();
        for (pos, &a) in alpha.iter().enumerate() {
            if a.abs() <= ptol {
                continue;
            }
            let j = self.basis[pos];
            let rate = -dir * a;
            let xv = self.x[j];
            let (l, u) = (self.lo[j], self.up[j]);
            let target = if rate < 0.0 {
                if xv > u + ftol {
                    u
                } else if xv >= l - ftol {
                    l
                } else {
                    continue;
                }
            } else if xv < l - ftol {
                l
            } else if xv <= u + ftol {
                u
            } else {
                continue;
            };
            if !target.is_finite() {
                continue;
            }
            let exact = ((target - xv) / rate).max(0.0);
            let harris = ((target - xv) / rate + ftol / rate.abs()).max(0.0);
            cands.push((pos, exact, harris, target, a.abs()));
        }
        if cands.is_empty() {
            return None;
        }
        if bland {
            let mut best = cands[0];
            for &c in &cands[1..] {
                let tie = (c.1 - best.1).abs() <= DEGENERATE_STEP;
                if c.1 < best.1 - DEGENERATE_STEP
                    || (tie && self.basis[c.0] < self.basis[best.0])
                {
                    best = c;
                }
            }
            return Some((best.0, best.1, best.3));
        }
        let theta_max = cands.iter().map(|c| c.2).fold(INF, f64::min);
        let mut best: Option<(usize, f64, f64, f64, f64)> = None;
        for &c in &cands {
            if c.1 <= theta_max && best.is_none_or(|b| c.4 > b.4) {
                best = Some(c);
            }
        }
        best.map(|b| (b.0, b.1, b.3))
    }

    fn finish(mut self, y: Vec<f64>, iterations: usize) -> LpSolution {
        let ftol = self.opts.feas_tol;
        for &j in &self.basis {
            if self.x[j] < self.lo[j] && self.x[j] >= self.lo[j] - ftol {
                self.x[j] = self.lo[j];
            }
            if self.x[j] > self.up[j] && self.x[j] <= self.up[j] + ftol {
                self.x[j] = self.up[j];
            }
        }
        let n = self.n;
        let x: Vec<f64> = self.x[..n].to_vec();
        let reduced_costs: Vec<f64> = (0..n)
            .map(|j| self.reduced_cost(j, self.cost[j], &y))
            .collect();
        let objective = (0..n).map(|j| self.cost[j] * x[j]).sum();
        let row_activity = self.p.row_activity(&x);
        LpSolution {
            x,
            row_duals: y,
            reduced_costs,
            row_activity,
            objective,
            basis: Basis {
                var_status: self.status[..n].to_vec(),
                row_status: self.status[n..].to_vec(),
            },
            iterations,
        }
    }
}
