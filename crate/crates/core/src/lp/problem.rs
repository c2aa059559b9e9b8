use std::fmt::Write as _;

use super::LpError;

/// Sense of a linear constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// A minimization LP with bounded variables, stored column-wise.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    sense: Vec<RowSense>,
    rhs: Vec<f64>,
    var_names: Vec<String>,
    row_names: Vec<String>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn cost(&self, j: usize) -> f64 {
        self.cost[j]
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn sense(&self, i: usize) -> RowSense {
        self.sense[i]
    }

    pub fn rhs(&self, i: usize) -> f64 {
        self.rhs[i]
    }

    /// Nonzeros of column `j` as `(row, coefficient)`.
    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    pub fn var_name(&self, j: usize) -> &str {
        &self.var_names[j]
    }

    pub fn row_name(&self, i: usize) -> &str {
        &self.row_names[i]
    }

    /// Adds a variable with no constraint coefficients.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> Result<usize, LpError> {
        self.add_column(cost, lower, upper, &[])
    }

    /// Adds a variable together with its coefficients in existing rows.
    pub fn add_column(
        &mut self,
        cost: f64,
        lower: f64,
        upper: f64,
        entries: &[(usize, f64)],
    ) -> Result<usize, LpError> {
        if !cost.is_finite() || lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(LpError::Malformed(format!(
                "variable with cost {cost} and bounds [{lower}, {upper}]"
            )));
        }
        if lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(LpError::Malformed("variable bound at wrong infinity".into()));
        }
        let mut col = Vec::with_capacity(entries.len());
        for &(i, v) in entries {
            if i >= self.num_rows() {
                return Err(LpError::Malformed(format!("row {i} out of range")));
            }
            if !v.is_finite() {
                return Err(LpError::Malformed(format!("non-finite coefficient in row {i}")));
            }
            if v != 0.0 {
                col.push((i, v));
            }
        }
        merge_duplicates(&mut col);
        let j = self.num_vars();
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cols.push(col);
        self.var_names.push(format!("x{j}"));
        Ok(j)
    }

    /// Adds a row `Σ coeffs · x (sense) rhs` over existing variables.
    pub fn add_row(
        &mut self,
        coeffs: &[(usize, f64)],
        sense: RowSense,
        rhs: f64,
    ) -> Result<usize, LpError> {
        if !rhs.is_finite() {
            return Err(LpError::Malformed(format!("non-finite rhs {rhs}")));
        }
        for &(j, v) in coeffs {
            if j >= self.num_vars() {
                return Err(LpError::Malformed(format!("variable {j} out of range")));
            }
            if !v.is_finite() {
                return Err(LpError::Malformed(format!("non-finite coefficient for {j}")));
            }
        }
        let i = self.num_rows();
        for &(j, v) in coeffs {
            if v != 0.0 {
                match self.cols[j].last_mut() {
                    Some((r, acc)) if *r == i => *acc += v,
                    _ => self.cols[j].push((i, v)),
                }
            }
        }
        self.sense.push(sense);
        self.rhs.push(rhs);
        self.row_names.push(format!("r{i}"));
        Ok(i)
    }

    pub fn set_var_name(&mut self, j: usize, name: impl Into<String>) {
        self.var_names[j] = name.into();
    }

    pub fn set_row_name(&mut self, i: usize, name: impl Into<String>) {
        self.row_names[i] = name.into();
    }

    pub fn set_cost(&mut self, j: usize, cost: f64) {
        self.cost[j] = cost;
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(LpError::Malformed(format!("bounds [{lower}, {upper}]")));
        }
        self.lower[j] = lower;
        self.upper[j] = upper;
        Ok(())
    }

    /// Row activities `A x`.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.num_rows()];
        for (j, col) in self.cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(i, v) in col {
                    act[i] += v * x[j];
                }
            }
        }
        act
    }

    /// Rows as `(variable, coefficient)` lists in variable order.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.num_rows()];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                rows[i].push((j, v));
            }
        }
        rows
    }

    /// CPLEX-style LP text, readable by most solvers for cross-checking.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::from("Minimize\n obj:");
        let mut any = false;
        for j in 0..self.num_vars() {
            if self.cost[j] != 0.0 {
                write_term(&mut out, self.cost[j], &self.var_names[j]);
                any = true;
            }
        }
        if !any {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows().iter().enumerate() {
            let _ = write!(out, " {}:", self.row_names[i]);
            if row.is_empty() {
                out.push_str(" 0");
            }
            for &(j, v) in row {
                write_term(&mut out, v, &self.var_names[j]);
            }
            let op = match self.sense[i] {
                RowSense::Le => "<=",
                RowSense::Eq => "=",
                RowSense::Ge => ">=",
            };
            let _ = writeln!(out, " {op} {}", self.rhs[i]);
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars() {
            let (l, u) = (self.lower[j], self.upper[j]);
            let name = &self.var_names[j];
            let _ = match (l.is_finite(), u.is_finite()) {
                (false, false) => writeln!(out, " {name} free"),
                (true, false) => writeln!(out, " {name} >= {l}"),
                (false, true) => writeln!(out, " -inf <= {name} <= {u}"),
                (true, true) if l == u => writeln!(out, " {name} = {l}"),
                (true, true) => writeln!(out, " {l} <= {name} <= {u}"),
            };
        }
        out.push_str("End\n");
        out
    }
}

fn write_term(out: &mut String, v: f64, name: &str) {
    if v < 0.0 {
        let _ = write!(out, " - {} {name}", -v);
    } else {
        let _ = write!(out, " + {v} {name}");
    }
}

fn merge_duplicates(col: &mut Vec<(usize, f64)>) {
    col.sort_by_key(|&(i, _)| i);
    col.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
    col.retain(|&(_, v)| v != 0.0);
}
