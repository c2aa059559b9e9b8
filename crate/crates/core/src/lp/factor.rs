//! Basis factorization.
//!
//! After permutation every basis has the block form
//!
//! ```text
//!   [ A(R, K)   0 ]
//!   [ A(S, K)   I ]
//! ```
//!
//! where `S` are the rows whose slack is basic, `R` the remaining rows and `K`
//! the basic structural columns (`|K| = |R|`). Only the core `A(R, K)` needs a
//! dense LU; slack positions are back-substituted. Pivots since the last
//! refactorization are kept as product-form eta vectors.

use super::problem::LpProblem;

pub(crate) const NONE: usize = usize::MAX;
const LU_PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct DenseLu {
    k: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Partial-pivoting LU of a row-major `k×k` matrix. On failure returns the
    /// column at which no acceptable pivot was left.
    fn factor(mut a: Vec<f64>, k: usize) -> Result<Self, usize> {
        let mut perm: Vec<usize> = (0..k).collect();
        for c in 0..k {
            let mut best = c;
            let mut best_abs = a[c * k + c].abs();
            for r in (c + 1)..k {
                let v = a[r * k + c].abs();
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            if best_abs < LU_PIVOT_TOL {
                return Err(c);
            }
            if best != c {
                for j in 0..k {
                    a.swap(best * k + j, c * k + j);
                }
                perm.swap(best, c);
            }
            let piv = a[c * k + c];
            for r in (c + 1)..k {
                let l = a[r * k + c] / piv;
                if l == 0.0 {
                    continue;
                }
                a[r * k + c] = l;
                let (upper, lower) = a.split_at_mut(r * k);
                let src = &upper[c * k + c + 1..c * k + k];
                let dst = &mut lower[c + 1..k];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= l * s;
                }
            }
        }
        Ok(DenseLu { k, lu: a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..k {
            let row = &self.lu[i * k..i * k + i];
            let s: f64 = row.iter().zip(&y[..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in (0..k).rev() {
            let row = &self.lu[i * k + i + 1..i * k + k];
            let s: f64 = row.iter().zip(&y[i + 1..]).map(|(u, v)| u * v).sum();
            y[i] = (y[i] - s) / self.lu[i * k + i];
        }
        y
    }

    fn solve_transposed(&self, r: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut v = r.to_vec();
        // U^T v = r
        for i in 0..k {
            let vi = v[i] / self.lu[i * k + i];
            v[i] = vi;
            if vi != 0.0 {
                for j in (i + 1)..k {
                    v[j] -= self.lu[i * k + j] * vi;
                }
            }
        }
        // L^T w = v
        for i in (0..k).rev() {
            let wi = v[i];
            if wi != 0.0 {
                for j in 0..i {
                    v[j] -= self.lu[i * k + j] * wi;
                }
            }
        }
        let mut x = vec![0.0; k];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = v[i];
        }
        x
    }
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    inv_pivot: f64,
    entries: Vec<(usize, f64)>,
}

/// Outcome of a refactorization that had to patch a singular basis.
#[derive(Debug, Default)]
pub(crate) struct Repair {
    /// `(position, dropped structural)`: the slack of the row in the returned
    /// basis now occupies that position.
    pub replaced: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub(crate) struct BasisFactor {
    m: usize,
    core_rows: Vec<usize>,
    core_vars: Vec<usize>,
    core_pos: Vec<usize>,
    slack_pos_of_row: Vec<usize>,
    lu: DenseLu,
    etas: Vec<Eta>,
}

impl BasisFactor {
    /// Factors `basis` (position -> variable; slacks are `n + row`). Singular
    /// bases are repaired in place by swapping dependent structurals for
    /// slacks of uncovered rows.
    pub(crate) fn new(p: &LpProblem, basis: &mut [usize]) -> (Self, Repair) {
        let m = p.num_rows();
        let n = p.num_vars();
        let mut repair = Repair::default();
        loop {
            let mut slack_pos_of_row = vec![NONE; m];
            let mut core_vars = Vec::new();
            let mut core_pos = Vec::new();
            for (pos, &var) in basis.iter().enumerate() {
                if var >= n {
                    slack_pos_of_row[var - n] = pos;
                } else {
                    core_vars.push(var);
                    core_pos.push(pos);
                }
            }
            let core_rows: Vec<usize> = (0..m).filter(|&i| slack_pos_of_row[i] == NONE).collect();
            debug_assert_eq!(core_rows.len(), core_vars.len());
            let k = core_rows.len();
            let mut row_in_core = vec![NONE; m];
            for (s, &i) in core_rows.iter().enumerate() {
                row_in_core[i] = s;
            }
            let mut mat = vec![0.0; k * k];
            for (t, &j) in core_vars.iter().enumerate() {
                for &(i, v) in p.column(j) {
                    let s = row_in_core[i];
                    if s != NONE {
                        mat[s * k + t] += v;
                    }
                }
            }
            match DenseLu::factor(mat.clone(), k) {
                Ok(lu) => {
                    return (
                        BasisFactor {
                            m,
                            core_rows,
                            core_vars,
                            core_pos,
                            slack_pos_of_row,
                            lu,
                            etas: Vec::new(),
                        },
                        repair,
                    );
                }
                Err(_) => {
                    let (dropped_cols, free_rows) = dependent_columns(mat, k);
                    debug_assert_eq!(dropped_cols.len(), free_rows.len());
                    for (t, s) in dropped_cols.into_iter().zip(free_rows) {
                        let pos = core_pos[t];
                        repair.replaced.push((pos, core_vars[t]));
                        basis[pos] = n + core_rows[s];
                    }
                }
            }
        }
    }

    pub(crate) fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = a` for a dense row-indexed `a`; result is indexed by
    /// basis position.
    pub(crate) fn ftran(&self, p: &LpProblem, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        let b_core: Vec<f64> = self.core_rows.iter().map(|&i| a[i]).collect();
        let z = self.lu.solve(&b_core);
        let mut tmp = a.to_vec();
        for (t, &zt) in z.iter().enumerate() {
            out[self.core_pos[t]] = zt;
            if zt != 0.0 {
                for &(i, v) in p.column(self.core_vars[t]) {
                    tmp[i] -= v * zt;
                }
            }
        }
        for (i, &pos) in self.slack_pos_of_row.iter().enumerate() {
            if pos != NONE {
                out[pos] = tmp[i];
            }
        }
        for eta in &self.etas {
            let vr = out[eta.pos];
            if vr != 0.0 {
                out[eta.pos] = vr * eta.inv_pivot;
                for &(i, e) in &eta.entries {
                    out[i] += e * vr;
                }
            }
        }
        out
    }

    /// Solves `y^T B = c^T` for `c` indexed by basis position; `y` is indexed
    /// by row.
    pub(crate) fn btran(&self, p: &LpProblem, c: &[f64]) -> Vec<f64> {
        let mut v = c.to_vec();
        for eta in self.etas.iter().rev() {
            let mut s = v[eta.pos] * eta.inv_pivot;
            for &(i, e) in &eta.entries {
                s += v[i] * e;
            }
            v[eta.pos] = s;
        }
        let mut y = vec![0.0; self.m];
        for (i, &pos) in self.slack_pos_of_row.iter().enumerate() {
            if pos != NONE {
                y[i] = v[pos];
            }
        }
        let rhs: Vec<f64> = self
            .core_vars
            .iter()
            .zip(&self.core_pos)
            .map(|(&j, &pos)| {
                let mut r = v[pos];
                for &(i, a) in p.column(j) {
                    if self.slack_pos_of_row[i] != NONE {
                        r -= y[i] * a;
                    }
                }
                r
            })
            .collect();
        let w = self.lu.solve_transposed(&rhs);
        for (s, &i) in self.core_rows.iter().enumerate() {
            y[i] = w[s];
        }
        y
    }

    /// Records the pivot that puts a new column with `B^{-1} a = alpha` at
    /// position `pos`.
    pub(crate) fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let inv_pivot = 1.0 / alpha[pos];
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a.abs() > 1e-14)
            .map(|(i, &a)| (i, -a * inv_pivot))
            .collect();
        self.etas.push(Eta {
            pos,
            inv_pivot,
            entries,
        });
    }
}

/// Gaussian elimination over the columns of a row-major `k×k` matrix,
/// returning the dependent columns and rows left without a pivot.
fn dependent_columns(mut a: Vec<f64>, k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut row_used = vec![false; k];
    let mut dropped = Vec::new();
    for c in 0..k {
        let mut best = NONE;
        let mut best_abs = LU_PIVOT_TOL;
        for r in 0..k {
            if !row_used[r] && a[r * k + c].abs() > best_abs {
                best = r;
                best_abs = a[r * k + c].abs();
            }
        }
        if best == NONE {
            dropped.push(c);
            continue;
        }
        row_used[best] = true;
        let piv = a[best * k + c];
        for r in 0..k {
            if r != best && !row_used[r] {
                let l = a[r * k + c] / piv;
                if l != 0.0 {
                    for j in c..k {
                        a[r * k + j] -= l * a[best * k + j];
                    }
                }
            }
        }
    }
    let free_rows = (0..k).filter(|&r| !row_used[r]).collect();
    (dropped, free_rows)
}
