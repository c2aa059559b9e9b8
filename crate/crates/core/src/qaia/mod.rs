//! Ising models and two annealing-inspired heuristics: ballistic simulated
//! bifurcation and a simulated coherent Ising machine.

mod bsb;
mod simcim;

pub use bsb::solve_bsb;
pub use simcim::solve_simcim;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QaiaError {
    #[error("spin vector has length {got}, model has {expected} spins")]
    WrongLength { expected: usize, got: usize },
    #[error("spin {index} is {value}, expected -1 or +1")]
    NotASpin { index: usize, value: i8 },
    #[error("coupling matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("coupling matrix has nonzero diagonal at {0}")]
    Diagonal(usize),
    #[error("non-finite model coefficient")]
    NonFinite,
    #[error("brute force is limited to 20 spins, model has {0}")]
    TooLarge(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("all {0} restarts diverged")]
    Diverged(usize),
}

/// `H(σ) = ½ σᵀJσ + hᵀσ + offset` with `J` symmetric, zero diagonal,
/// stored as compressed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    h: Vec<f64>,
    offset: f64,
}

impl IsingModel {
    /// Builds a model from upper-or-lower triangle couplings `(i, j, J_ij)`;
    /// each unordered pair is mirrored and repeated pairs are summed.
    pub fn from_couplings(
        n: usize,
        couplings: &[(usize, usize, f64)],
        h: Vec<f64>,
        offset: f64,
    ) -> Result<Self, QaiaError> {
        if h.len() != n {
            return Err(QaiaError::WrongLength {
                expected: n,
                got: h.len(),
            });
        }
        if !offset.is_finite() || h.iter().any(|v| !v.is_finite()) {
            return Err(QaiaError::NonFinite);
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in couplings {
            if i >= n || j >= n {
                return Err(QaiaError::WrongLength {
                    expected: n,
                    got: i.max(j) + 1,
                });
            }
            if i == j {
                return Err(QaiaError::Diagonal(i));
            }
            if !v.is_finite() {
                return Err(QaiaError::NonFinite);
            }
            rows[i].push((j, v));
            rows[j].push((i, v));
        }
        let mut row_start = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut s = 0.0;
                while k < row.len() && row[k].0 == j {
                    s += row[k].1;
                    k += 1;
                }
                if s != 0.0 {
                    cols.push(j);
                    vals.push(s);
                }
            }
            row_start.push(cols.len());
        }
        Ok(IsingModel {
            n,
            row_start,
            cols,
            vals,
            h,
            offset,
        })
    }

    /// Builds a model from a dense row-major `n×n` coupling matrix, which must
    /// be symmetric with zero diagonal.
    pub fn from_dense(n: usize, j: &[f64], h: Vec<f64>, offset: f64) -> Result<Self, QaiaError> {
        if j.len() != n * n {
            return Err(QaiaError::WrongLength {
                expected: n * n,
                got: j.len(),
            });
        }
        let mut couplings = Vec::new();
        for a in 0..n {
            if j[a * n + a] != 0.0 {
                return Err(QaiaError::Diagonal(a));
            }
            for b in (a + 1)..n {
                if j[a * n + b] != j[b * n + a] {
                    return Err(QaiaError::Asymmetric(a, b));
                }
                if j[a * n + b] != 0.0 {
                    couplings.push((a, b, j[a * n + b]));
                }
            }
        }
        Self::from_couplings(n, &couplings, h, offset)
    }

    pub fn num_spins(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &[f64] {
        &self.h
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Nonzero couplings `(j, J_ij)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(k, _)| k == j).map_or(0.0, |(_, v)| v)
    }

    /// Dense copy of `J`.
    pub fn dense_couplings(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[i * self.n + j] = v;
            }
        }
        out
    }

    /// `J v` for a dense vector.
    pub fn couple(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let r = self.row_start[i]..self.row_start[i + 1];
            *o = self.cols[r.clone()]
                .iter()
                .zip(&self.vals[r])
                .map(|(&j, &a)| a * v[j])
                .sum();
        }
    }

    fn local_field(&self, spins: &[i8], i: usize) -> f64 {
        self.row(i).map(|(j, v)| v * f64::from(spins[j])).sum::<f64>() + self.h[i]
    }

    /// `E(flip_i σ) − E(σ)`.
    pub fn flip_delta(&self, spins: &[i8], i: usize) -> f64 {
        -2.0 * f64::from(spins[i]) * self.local_field(spins, i)
    }

    /// Auto coupling scale: `2 / sqrt(Σ_{i≠j} J_ij² / n)`. The denominator is
    /// the square-rooted mean degree times the RMS coupling; 0.1 for `J = 0`.
    pub fn default_coupling_scale(&self) -> f64 {
        let sq: f64 = self.vals.iter().map(|v| v * v).sum();
        if sq == 0.0 || self.n == 0 {
            0.1
        } else {
            2.0 / (sq / self.n as f64).sqrt()
        }
    }

    /// Exact energy including the offset.
    pub fn energy(&self, spins: &[i8]) -> Result<f64, QaiaError> {
        if spins.len() != self.n {
            return Err(QaiaError::WrongLength {
                expected: self.n,
                got: spins.len(),
            });
        }
        if let Some((index, &value)) = spins.iter().enumerate().find(|(_, &s)| s != 1 && s != -1) {
            return Err(QaiaError::NotASpin { index, value });
        }
        Ok(self.energy_unchecked(spins))
    }

    fn energy_unchecked(&self, spins: &[i8]) -> f64 {
        // every term is exact (±coefficient), so only the summation rounds
        let mut e = CompensatedSum::default();
        for i in 0..self.n {
            let si = f64::from(spins[i]);
            for (j, v) in self.row(i) {
                if j > i {
                    e.add(v * si * f64::from(spins[j]));
                }
            }
            e.add(self.h[i] * si);
        }
        e.add(self.offset);
        e.value()
    }
}

/// Neumaier summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaiaConfig {
    pub steps: usize,
    /// `None` selects the backend default (0.25 for BSB, 0.05 for SimCIM).
    pub dt: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
    /// Coupling scale; 0 selects [`IsingModel::default_coupling_scale`].
    pub xi: f64,
    /// SimCIM noise amplitude.
    pub noise: f64,
    pub pump_start: f64,
    pub pump_end: f64,
    /// BSB pump amplitude `a0`.
    pub pump_amplitude: f64,
}

impl Default for QaiaConfig {
    fn default() -> Self {
        QaiaConfig {
            steps: 1000,
            dt: None,
            restarts: 32,
            seed: 0,
            xi: 0.0,
            noise: 0.01,
            pump_start: -1.0,
            pump_end: 1.0,
            pump_amplitude: 1.0,
        }
    }
}

impl QaiaConfig {
    fn validate(&self, dt: f64) -> Result<(), QaiaError> {
        if self.steps == 0 {
            return Err(QaiaError::Config("steps must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(QaiaError::Config("restarts must be at least 1".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(QaiaError::Config(format!("dt must be positive, got {dt}")));
        }
        if !self.xi.is_finite() || self.xi < 0.0 || !self.noise.is_finite() || self.noise < 0.0 {
            return Err(QaiaError::Config("xi and noise must be non-negative".into()));
        }
        Ok(())
    }

    fn coupling_scale(&self, m: &IsingModel) -> f64 {
        if self.xi > 0.0 {
            self.xi
        } else {
            m.default_coupling_scale()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinResult {
    pub best_spins: Vec<i8>,
    pub best_energy: f64,
    /// Final spins of every restart that stayed finite, in restart order.
    pub restart_spins: Vec<Vec<i8>>,
    pub restart_energies: Vec<f64>,
    pub wall_time: Duration,
}

/// Runs `restart(index)` for every restart in parallel and gathers the results
/// in restart order, so the outcome does not depend on scheduling.
fn run_restarts<F>(m: &IsingModel, restarts: usize, restart: F) -> Result<SpinResult, QaiaError>
where
    F: Fn(usize) -> Option<Vec<i8>> + Sync,
{
    let started = Instant::now();
    let outcomes: Vec<Option<Vec<i8>>> = (0..restarts).into_par_iter().map(&restart).collect();
    let restart_spins: Vec<Vec<i8>> = outcomes.into_iter().flatten().collect();
    if restart_spins.is_empty() {
        return Err(QaiaError::Diverged(restarts));
    }
    let restart_energies: Vec<f64> = restart_spins.iter().map(|s| m.energy_unchecked(s)).collect();
    let mut best = 0;
    for (k, &e) in restart_energies.iter().enumerate() {
        if e < restart_energies[best] {
            best = k;
        }
    }
    Ok(SpinResult {
        best_spins: restart_spins[best].clone(),
        best_energy: restart_energies[best],
        restart_spins,
        restart_energies,
        wall_time: started.elapsed(),
    })
}

fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Exhaustive ground state; ties go to the lexicographically smallest spin
/// vector (with −1 < +1).
pub fn brute_force_ground(m: &IsingModel) -> Result<SpinResult, QaiaError> {
    let n = m.n;
    if n > 20 {
        return Err(QaiaError::TooLarge(n));
    }
    let started = Instant::now();
    let mut spins = vec![-1i8; n];
    let mut e = m.energy_unchecked(&spins);
    let mut best_e = e;
    let mut best = spins.clone();
    // Gray-code walk; spin i of the code maps to position n-1-i so that the
    // lexicographic tie-break can be applied on the fly.
    for k in 1u64..(1u64 << n) {
        let bit = k.trailing_zeros() as usize;
        let i = n - 1 - bit;
        e += m.flip_delta(&spins, i);
        spins[i] = -spins[i];
        if e <= best_e + 1e-9 {
            e = m.energy_unchecked(&spins);
            if e < best_e || (e == best_e && spins < best) {
                best.clone_from(&spins);
                best_e = e;
            }
        }
    }
    let best_energy = m.energy_unchecked(&best);
    Ok(SpinResult {
        best_spins: best.clone(),
        best_energy,
        restart_spins: vec![best],
        restart_energies: vec![best_energy],
        wall_time: started.elapsed(),
    })
}
