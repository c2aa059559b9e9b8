//! Solver settings and the flat `key = value` configuration format.

use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::lp::LpOptions;
use crate::pricing::{Backend, PricingConfig};
use crate::qaia::QaiaConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}")]
    BadValue { key: String, value: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub time_limit: Duration,
    pub pricing: PricingConfig,
    pub qaia: QaiaConfig,
    pub lp: LpOptions,
    /// Conflict rows are separated lazily above this many `(edge, pile)` pairs.
    pub lazy_row_threshold: usize,
    /// Check KKT conditions of every RMP solve and fail on violations.
    pub audit_lp: bool,
    /// Keep a record of every branching for later inspection.
    pub record_branches: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit: Duration::from_secs(3600),
            pricing: PricingConfig::default(),
            qaia: QaiaConfig::default(),
            lp: LpOptions::default(),
            lazy_row_threshold: 50_000,
            audit_lp: false,
            record_branches: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "bnp.time_limit",
    "bnp.lazy_rows",
    "pricing.backend",
    "pricing.restarts",
    "pricing.max_cols",
    "pricing.alpha",
    "pricing.rc_eps",
    "qubo.lambda1",
    "qubo.lambda2",
    "qaia.steps",
    "qaia.dt",
    "qaia.restarts",
    "qaia.seed",
    "qaia.xi",
    "qaia.noise",
    "qaia.pump_start",
    "qaia.pump_end",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl SolverConfig {
    /// Applies one setting. `qaia.restarts` and `pricing.restarts` are the
    /// same knob.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key.trim() {
            "bnp.time_limit" => {
                let secs: f64 = parse(key, value)?;
                if !(secs >= 0.0 && secs.is_finite()) {
                    return Err(ConfigError::BadValue {
                        key: key.to_string(),
                        value: value.to_string(),
                    });
                }
                self.time_limit = Duration::from_secs_f64(secs);
            }
            "bnp.lazy_rows" => self.lazy_row_threshold = parse(key, value)?,
            "pricing.backend" => {
                self.pricing.backend = value.parse::<Backend>().map_err(|_| ConfigError::BadValue {
                    key: key.to_string(),
                    value: value.to_string(),
                })?
            }
            "pricing.restarts" | "qaia.restarts" => {
                let r: usize = parse(key, value)?;
                self.pricing.restarts = r;
                self.qaia.restarts = r;
            }
            "pricing.max_cols" => self.pricing.max_cols = parse(key, value)?,
            "pricing.alpha" => self.pricing.alpha = parse(key, value)?,
            "pricing.rc_eps" => self.pricing.rc_eps = parse(key, value)?,
            "qubo.lambda1" => self.pricing.lambda1 = parse(key, value)?,
            "qubo.lambda2" => self.pricing.lambda2 = parse(key, value)?,
            "qaia.steps" => self.qaia.steps = parse(key, value)?,
            "qaia.dt" => {
                let dt: f64 = parse(key, value)?;
                self.qaia.dt = (dt > 0.0).then_some(dt);
            }
            "qaia.seed" => self.qaia.seed = parse(key, value)?,
            "qaia.xi" => self.qaia.xi = parse(key, value)?,
            "qaia.noise" => self.qaia.noise = parse(key, value)?,
            "qaia.pump_start" => self.qaia.pump_start = parse(key, value)?,
            "qaia.pump_end" => self.qaia.pump_end = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies a `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            if key.trim().is_empty() || value.trim().is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            self.set(key, value)?;
        }
        Ok(())
    }
}
