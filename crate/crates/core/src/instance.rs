//! EV charging instances: vehicles with candidate charging intervals.
//!
//! Every vehicle owns `K` candidate intervals of a common duration `d` inside
//! the horizon `[0, T]`; the intervals of one vehicle form a partition of the
//! vertex set. Start times are integers.
//!
//! Random instances are drawn with `ChaCha8Rng::seed_from_u64(seed)` (the
//! `rand_chacha` stream, seeded through `rand_core`'s PCG32 expansion of the
//! 64-bit seed). Vertices are generated vehicle by vehicle, and each start is
//! one `random_range(0..=T-d)` draw, so vertex `i` consumes the `i`-th draw of
//! the stream.
//!
//! # File format
//!
//! ```text
//! # comment lines start with '#'
//! pcp <|V|> <N> <C> <T> <d> <seed>
//! v <id> <partition> <start> <completion>
//! ...
//! ```
//!
//! Ids are 0-based and consecutive. Edges are never stored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default scheduling horizon (time units).
pub const DEFAULT_HORIZON: u32 = 24;
/// Default charging duration (time units).
pub const DEFAULT_DURATION: u32 = 3;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{num_vertices} vertices cannot be split into vehicles of {k} intervals")]
    NotDivisible { num_vertices: usize, k: usize },
    #[error("invalid horizon/duration: need horizon > duration > 0, got T={horizon}, d={duration}")]
    InvalidDuration { horizon: u32, duration: u32 },
    #[error("instance needs at least one vertex and one pile")]
    Empty,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("makespan of an empty selection")]
    EmptySelection,
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One candidate charging interval `[start, start + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub vertex_id: usize,
    pub vehicle: usize,
    pub start: u32,
    pub completion: u32,
}

impl Interval {
    /// Half-open overlap: back-to-back intervals do not conflict.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.completion && other.start < self.completion
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub horizon: u32,
    pub duration: u32,
    pub piles: usize,
    pub vertices: Vec<Interval>,
    pub partitions: Vec<Vec<usize>>,
    pub seed: u64,
}

impl Instance {
    /// Builds an instance from explicit start times, one list per vehicle.
    pub fn from_starts(
        horizon: u32,
        duration: u32,
        piles: usize,
        starts: &[Vec<u32>],
        seed: u64,
    ) -> Result<Self, InstanceError> {
        let mut vertices = Vec::new();
        let mut partitions = Vec::with_capacity(starts.len());
        for (vehicle, list) in starts.iter().enumerate() {
            let mut part = Vec::with_capacity(list.len());
            for &start in list {
                let id = vertices.len();
                vertices.push(Interval {
                    vertex_id: id,
                    vehicle,
                    start,
                    completion: start.saturating_add(duration),
                });
                part.push(id);
            }
            partitions.push(part);
        }
        let inst = Instance {
            horizon,
            duration,
            piles,
            vertices,
            partitions,
            seed,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.duration == 0 || self.duration >= self.horizon {
            return Err(InstanceError::InvalidDuration {
                horizon: self.horizon,
                duration: self.duration,
            });
        }
        if self.vertices.is_empty() || self.piles == 0 {
            return Err(InstanceError::Empty);
        }
        let latest = self.horizon - self.duration;
        for (i, v) in self.vertices.iter().enumerate() {
            if v.vertex_id != i {
                return Err(InstanceError::Invalid(format!(
                    "vertex at position {i} has id {}",
                    v.vertex_id
                )));
            }
            if v.start > latest {
                return Err(InstanceError::Invalid(format!(
                    "vertex {i} starts at {} > T-d = {latest}",
                    v.start
                )));
            }
            if v.completion != v.start + self.duration {
                return Err(InstanceError::Invalid(format!(
                    "vertex {i}: completion {} != start + d",
                    v.completion
                )));
            }
            if v.vehicle >= self.partitions.len() {
                return Err(InstanceError::Invalid(format!(
                    "vertex {i} belongs to unknown vehicle {}",
                    v.vehicle
                )));
            }
        }
        let mut seen = vec![false; self.vertices.len()];
        for (n, part) in self.partitions.iter().enumerate() {
            if part.is_empty() {
                return Err(InstanceError::Invalid(format!("vehicle {n} has no interval")));
            }
            for &v in part {
                if v >= seen.len() || seen[v] {
                    return Err(InstanceError::Invalid(format!(
                        "vertex {v} listed twice or out of range"
                    )));
                }
                if self.vertices[v].vehicle != n {
                    return Err(InstanceError::Invalid(format!(
                        "vertex {v} is in partition {n} but records vehicle {}",
                        self.vertices[v].vehicle
                    )));
                }
                seen[v] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(InstanceError::Invalid("partitions do not cover all vertices".into()));
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_vehicles(&self) -> usize {
        self.partitions.len()
    }

    /// Candidate intervals per vehicle (size of the largest partition).
    pub fn k_per_vehicle(&self) -> usize {
        self.partitions.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn completion(&self, v: usize) -> u32 {
        self.vertices[v].completion
    }

    /// Name in the `vVcCKsS` convention, with `V` the vertex count.
    pub fn name(&self) -> String {
        format!(
            "v{}c{}k{}s{}",
            self.num_vertices(),
            self.piles,
            self.k_per_vehicle(),
            self.seed
        )
    }

    pub fn file_name(&self) -> String {
        format!("{}.pcp", self.name())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} : T={} d={} K={}, starts ~ U{{0..{}}} (ChaCha8Rng seed_from_u64)",
            self.name(),
            self.horizon,
            self.duration,
            self.k_per_vehicle(),
            self.horizon - self.duration
        );
        let _ = writeln!(
            out,
            "pcp {} {} {} {} {} {}",
            self.num_vertices(),
            self.num_vehicles(),
            self.piles,
            self.horizon,
            self.duration,
            self.seed
        );
        for v in &self.vertices {
            let _ = writeln!(
                out,
                "v {} {} {} {}",
                v.vertex_id, v.vehicle, v.start, v.completion
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let perr = |line: usize, msg: String| InstanceError::Parse { line, msg };
        let mut header: Option<(usize, usize, usize, u32, u32, u64)> = None;
        let mut slots: Vec<Option<Interval>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "pcp" => {
                    if header.is_some() {
                        return Err(perr(lineno, "duplicate header".into()));
                    }
                    if fields.len() != 7 {
                        return Err(perr(lineno, "header needs 6 fields".into()));
                    }
                    let num = |i: usize| -> Result<u64, InstanceError> {
                        fields[i]
                            .parse::<u64>()
                            .map_err(|e| perr(lineno, format!("header field {i}: {e}")))
                    };
                    let (nv, nn, c, t, d, s) = (num(1)?, num(2)?, num(3)?, num(4)?, num(5)?, num(6)?);
                    if t > u32::MAX as u64 || d > u32::MAX as u64 {
                        return Err(perr(lineno, "horizon/duration out of range".into()));
                    }
                    if d == 0 || d >= t {
                        return Err(perr(lineno, format!("need T > d > 0, got T={t}, d={d}")));
                    }
                    header = Some((nv as usize, nn as usize, c as usize, t as u32, d as u32, s));
                    slots = vec![None; nv as usize];
                }
                "v" => {
                    let Some((nv, nn, _, t, d, _)) = header else {
                        return Err(perr(lineno, "vertex line before header".into()));
                    };
                    if fields.len() != 5 {
                        return Err(perr(lineno, "vertex line needs 4 fields".into()));
                    }
                    let num = |i: usize| -> Result<u64, InstanceError> {
                        fields[i]
                            .parse::<u64>()
                            .map_err(|e| perr(lineno, format!("vertex field {i}: {e}")))
                    };
                    let (id, part, start, completion) = (num(1)?, num(2)?, num(3)?, num(4)?);
                    let id = id as usize;
                    if id >= nv {
                        return Err(perr(lineno, format!("vertex id {id} >= |V| = {nv}")));
                    }
                    if slots[id].is_some() {
                        return Err(perr(lineno, format!("duplicate vertex id {id}")));
                    }
                    if part as usize >= nn {
                        return Err(perr(lineno, format!("partition {part} out of range (N = {nn})")));
                    }
                    if start > (t - d) as u64 {
                        return Err(perr(
                            lineno,
                            format!("start {start} outside [0, {}]", t - d),
                        ));
                    }
                    if completion != start + d as u64 {
                        return Err(perr(
                            lineno,
                            format!("completion {completion} != start + d = {}", start + d as u64),
                        ));
                    }
                    slots[id] = Some(Interval {
                        vertex_id: id,
                        vehicle: part as usize,
                        start: start as u32,
                        completion: completion as u32,
                    });
                }
                other => return Err(perr(lineno, format!("unknown record '{other}'"))),
            }
        }
        let Some((nv, nn, piles, horizon, duration, seed)) = header else {
            return Err(perr(0, "missing header".into()));
        };
        let mut vertices = Vec::with_capacity(nv);
        for (id, slot) in slots.into_iter().enumerate() {
            vertices.push(slot.ok_or_else(|| perr(0, format!("vertex {id} missing")))?);
        }
        let mut partitions = vec![Vec::new(); nn];
        for v in &vertices {
            partitions[v.vehicle].push(v.vertex_id);
        }
        let inst = Instance {
            horizon,
            duration,
            piles,
            vertices,
            partitions,
            seed,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// Draws a random instance: `num_vertices / k_per_vehicle` vehicles with
/// `k_per_vehicle` integer starts each, uniform on `{0, ..., T-d}`.
pub fn generate(
    num_vertices: usize,
    k_per_vehicle: usize,
    piles: usize,
    seed: u64,
    horizon: u32,
    duration: u32,
) -> Result<Instance, InstanceError> {
    if k_per_vehicle == 0 || num_vertices == 0 || !num_vertices.is_multiple_of(k_per_vehicle) {
        return Err(InstanceError::NotDivisible {
            num_vertices,
            k: k_per_vehicle,
        });
    }
    if duration == 0 || duration >= horizon {
        return Err(InstanceError::InvalidDuration { horizon, duration });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latest = horizon - duration;
    let starts: Vec<Vec<u32>> = (0..num_vertices / k_per_vehicle)
        .map(|_| {
            (0..k_per_vehicle)
                .map(|_| rng.random_range(0..=latest))
                .collect()
        })
        .collect();
    Instance::from_starts(horizon, duration, piles, &starts, seed)
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    fs::write(path, inst.to_text())?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let text = fs::read_to_string(path)?;
    Instance::parse(&text)
}

/// Maximum completion time over `selected`.
pub fn makespan(inst: &Instance, selected: &[usize]) -> Result<u32, InstanceError> {
    let mut best = None;
    for &v in selected {
        let e = inst
            .vertices
            .get(v)
            .ok_or(InstanceError::UnknownVertex(v))?
            .completion;
        best = Some(best.map_or(e, |b: u32| b.max(e)));
    }
    best.ok_or(InstanceError::EmptySelection)
}

/// Checks that `selection` (one vertex per vehicle, indexed by vehicle) can be
/// charged on the instance's piles: every vertex belongs to its vehicle and at
/// no time more than `C` intervals run at once.
pub fn selection_fits_piles(inst: &Instance, selection: &[usize]) -> bool {
    if selection.len() != inst.num_vehicles() {
        return false;
    }
    for (n, &v) in selection.iter().enumerate() {
        if v >= inst.num_vertices() || inst.vertices[v].vehicle != n {
            return false;
        }
    }
    // Interval graphs are perfect: the pile count needed equals the peak load.
    let mut events: Vec<(u32, i32)> = Vec::with_capacity(2 * selection.len());
    for &v in selection {
        let iv = &inst.vertices[v];
        events.push((iv.start, 1));
        events.push((iv.completion, -1));
    }
    // Ends sort before starts at equal times (half-open intervals).
    events.sort();
    let mut load = 0i32;
    for (_, delta) in events {
        load += delta;
        if load as usize > inst.piles {
            return false;
        }
    }
    true
}
