//! Conflict graph over candidate intervals, with the mutations branching
//! needs: vertex removal, edge insertion and vertex contraction.
//!
//! Vertex slots are never reused. A contraction retires both endpoints and
//! appends a super-vertex whose neighbourhood is the union of theirs; the
//! super-vertex remembers the original intervals it stands for.

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::instance::Instance;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} is not alive")]
    DeadVertex(usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertices {0} and {1} are adjacent and cannot be contracted")]
    Adjacent(usize, usize),
    #[error("vertices {0} and {1} belong to the same partition")]
    SamePartition(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    adj: Vec<FixedBitSet>,
    alive: FixedBitSet,
    partition_of: Vec<usize>,
    merged_into: Vec<Option<usize>>,
    completion: Vec<u32>,
    members: Vec<Vec<usize>>,
    /// Partitions absorbed by a contraction point at the surviving partition.
    partition_merged_into: Vec<Option<usize>>,
    num_edges: usize,
}

/// Conflict graph of an instance: `u ~ v` iff they share a vehicle or their
/// half-open intervals overlap.
pub fn build_conflict_graph(inst: &Instance) -> ConflictGraph {
    let n = inst.num_vertices();
    let mut g = ConflictGraph {
        adj: vec![FixedBitSet::with_capacity(n); n],
        alive: {
            let mut b = FixedBitSet::with_capacity(n);
            b.insert_range(..);
            b
        },
        partition_of: inst.vertices.iter().map(|v| v.vehicle).collect(),
        merged_into: vec![None; n],
        completion: inst.vertices.iter().map(|v| v.completion).collect(),
        members: (0..n).map(|v| vec![v]).collect(),
        partition_merged_into: vec![None; inst.num_vehicles()],
        num_edges: 0,
    };
    for u in 0..n {
        for v in (u + 1)..n {
            let (a, b) = (&inst.vertices[u], &inst.vertices[v]);
            if a.vehicle == b.vehicle || a.overlaps(b) {
                g.link(u, v);
            }
        }
    }
    g
}

impl ConflictGraph {
    fn link(&mut self, u: usize, v: usize) {
        if !self.adj[u].contains(v) {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
            self.num_edges += 1;
        }
    }

    /// Number of vertex slots, dead ones included.
    pub fn num_slots(&self) -> usize {
        self.adj.len()
    }

    pub fn num_alive(&self) -> usize {
        self.alive.count_ones(..)
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn num_partition_slots(&self) -> usize {
        self.partition_merged_into.len()
    }

    pub fn is_alive(&self, v: usize) -> bool {
        v < self.adj.len() && self.alive.contains(v)
    }

    pub fn alive_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.alive.ones()
    }

    pub fn alive_set(&self) -> &FixedBitSet {
        &self.alive
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].ones()
    }

    pub fn neighbor_set(&self, v: usize) -> &FixedBitSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones(..)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && self.adj[u].contains(v)
    }

    /// Alive edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges);
        for u in self.alive.ones() {
            for v in self.adj[u].ones() {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn partition(&self, v: usize) -> usize {
        self.partition_of[v]
    }

    pub fn completion(&self, v: usize) -> u32 {
        self.completion[v]
    }

    /// Original interval ids represented by `v` (sorted).
    pub fn members(&self, v: usize) -> &[usize] {
        &self.members[v]
    }

    pub fn merged_into(&self, v: usize) -> Option<usize> {
        self.merged_into[v]
    }

    pub fn partition_merged_into(&self, p: usize) -> Option<usize> {
        self.partition_merged_into[p]
    }

    /// Partitions that still carry a one-per-partition row: those not absorbed
    /// by a contraction. An active partition with no alive vertex makes the
    /// node infeasible.
    pub fn active_partitions(&self) -> Vec<usize> {
        (0..self.partition_merged_into.len())
            .filter(|&p| self.partition_merged_into[p].is_none())
            .collect()
    }

    /// Alive vertices of every partition slot (empty for absorbed ones).
    pub fn partition_members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.partition_merged_into.len()];
        for v in self.alive.ones() {
            out[self.partition_of[v]].push(v);
        }
        out
    }

    pub fn alive_in_partition(&self, p: usize) -> Vec<usize> {
        self.alive
            .ones()
            .filter(|&v| self.partition_of[v] == p)
            .collect()
    }

    /// True when `set` is independent and hits each partition at most once.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        for (i, &u) in set.iter().enumerate() {
            if !self.is_alive(u) {
                return false;
            }
            for &v in &set[i + 1..] {
                if u == v || self.has_edge(u, v) || self.partition_of[u] == self.partition_of[v] {
                    return false;
                }
            }
        }
        true
    }

    /// Removes `v` and its incident edges.
    pub fn remove_vertex(&mut self, v: usize) -> Result<(), GraphError> {
        if !self.is_alive(v) {
            return Err(GraphError::DeadVertex(v));
        }
        let nbrs: Vec<usize> = self.adj[v].ones().collect();
        for w in nbrs {
            self.adj[w].set(v, false);
            self.num_edges -= 1;
        }
        self.adj[v].clear();
        self.alive.set(v, false);
        Ok(())
    }

    /// Inserts the edge `(u, v)`. Returns false when it already existed.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for x in [u, v] {
            if !self.is_alive(x) {
                return Err(GraphError::DeadVertex(x));
            }
        }
        let existed = self.adj[u].contains(v);
        self.link(u, v);
        Ok(!existed)
    }

    /// Replaces the non-adjacent vertices `u` and `v` by a new super-vertex
    /// `z` with `N(z) = N(u) ∪ N(v)`. The partition with the larger index is
    /// absorbed into the other; `z` completes at `max(e_u, e_v)`.
    pub fn contract(&mut self, u: usize, v: usize) -> Result<usize, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for x in [u, v] {
            if !self.is_alive(x) {
                return Err(GraphError::DeadVertex(x));
            }
        }
        if self.adj[u].contains(v) {
            return Err(GraphError::Adjacent(u, v));
        }
        let (pu, pv) = (self.partition_of[u], self.partition_of[v]);
        if pu == pv {
            return Err(GraphError::SamePartition(u, v));
        }
        let z = self.adj.len();
        let cap = z + 1;
        for row in &mut self.adj {
            row.grow(cap);
        }
        self.alive.grow(cap);
        let mut nz = self.adj[u].clone();
        nz.union_with(&self.adj[v]);
        nz.grow(cap);
        self.adj.push(FixedBitSet::with_capacity(cap));

        let keep = pu.min(pv);
        let gone = pu.max(pv);
        for p in self.partition_of.iter_mut() {
            if *p == gone {
                *p = keep;
            }
        }
        for link in self.partition_merged_into.iter_mut().flatten() {
            if *link == gone {
                *link = keep;
            }
        }
        self.partition_merged_into[gone] = Some(keep);

        let mut members: Vec<usize> = self.members[u]
            .iter()
            .chain(self.members[v].iter())
            .copied()
            .collect();
        members.sort_unstable();
        self.members.push(members);
        self.completion.push(self.completion[u].max(self.completion[v]));
        self.partition_of.push(keep);
        self.merged_into.push(None);
        self.merged_into[u] = Some(z);
        self.merged_into[v] = Some(z);

        self.remove_vertex(u)?;
        self.remove_vertex(v)?;
        self.alive.insert(z);
        for w in nz.ones() {
            if self.is_alive(w) && w != z {
                self.link(z, w);
            }
        }
        Ok(z)
    }

    /// Alive vertex currently standing for original interval `orig`, if any.
    pub fn representative(&self, orig: usize) -> Option<usize> {
        let mut v = orig;
        while let Some(next) = self.merged_into.get(v).copied().flatten() {
            v = next;
        }
        self.is_alive(v).then_some(v)
    }
}
