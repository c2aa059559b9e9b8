use crate::graph::ConflictGraph;

/// Exact DSATUR backtracking: a coloring of `vertices` with at most `colors`
/// colors that is proper on `graph`, as one color per entry of `vertices`.
pub fn color_within(graph: &ConflictGraph, vertices: &[usize], colors: usize) -> Option<Vec<usize>> {
    let n = vertices.len();
    if n == 0 {
        return Some(Vec::new());
    }
    if colors == 0 {
        return None;
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && graph.has_edge(vertices[i], vertices[j]))
                .collect()
        })
        .collect();
    let mut state = Dsatur {
        adj: &adj,
        colors,
        color: vec![usize::MAX; n],
        // how many colored neighbours use each color
        seen: vec![vec![0; colors]; n],
    };
    state.search(0).then_some(state.color)
}

struct Dsatur<'a> {
    adj: &'a [Vec<usize>],
    colors: usize,
    color: Vec<usize>,
    seen: Vec<Vec<u32>>,
}

impl Dsatur<'_> {
    fn saturation(&self, v: usize) -> usize {
        self.seen[v].iter().filter(|&&c| c > 0).count()
    }

    fn pick(&self) -> Option<usize> {
        (0..self.color.len())
            .filter(|&v| self.color[v] == usize::MAX)
            .max_by(|&a, &b| {
                (self.saturation(a), self.adj[a].len())
                    .cmp(&(self.saturation(b), self.adj[b].len()))
                    .then(b.cmp(&a))
            })
    }

    fn search(&mut self, used: usize) -> bool {
        let Some(v) = self.pick() else {
            return true;
        };
        // a fresh color is interchangeable with any other unused one
        let limit = (used + 1).min(self.colors);
        for c in 0..limit {
            if self.seen[v][c] > 0 {
                continue;
            }
            self.assign(v, c, true);
            if self.search(used.max(c + 1)) {
                return true;
            }
            self.assign(v, c, false);
        }
        false
    }

    fn assign(&mut self, v: usize, c: usize, on: bool) {
        self.color[v] = if on { c } else { usize::MAX };
        for &w in &self.adj[v] {
            if on {
                self.seen[w][c] += 1;
            } else {
                self.seen[w][c] -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_conflict_graph;
    use crate::instance::Instance;

    fn chromatic_brute(graph: &ConflictGraph, vs: &[usize]) -> usize {
        let n = vs.len();
        for k in 1..=n.max(1) {
            let mut assign = vec![0usize; n];
            loop {
                let ok = (0..n).all(|i| {
                    (i + 1..n).all(|j| !graph.has_edge(vs[i], vs[j]) || assign[i] != assign[j])
                });
                if ok {
                    return k;
                }
                let mut i = 0;
                while i < n && assign[i] + 1 == k {
                    assign[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
                assign[i] += 1;
            }
        }
        n
    }

    #[test]
    fn odd_cycle_needs_three_colors() {
        // five vehicles whose added edges form a 5-cycle
        let inst = Instance::from_starts(24, 3, 2, &[vec![0], vec![4], vec![8], vec![12], vec![16]], 0).unwrap();
        let mut g = build_conflict_graph(&inst);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5).unwrap();
        }
        let vs: Vec<usize> = (0..5).collect();
        assert!(color_within(&g, &vs, 2).is_none());
        let colors = color_within(&g, &vs, 3).unwrap();
        for i in 0..5 {
            assert_ne!(colors[i], colors[(i + 1) % 5]);
        }
        assert_eq!(color_within(&g, &[], 0), Some(vec![]));
        assert!(color_within(&g, &[0], 0).is_none());
    }

    #[test]
    fn matches_brute_force_chromatic_number() {
        for seed in 0..40u64 {
            let starts: Vec<Vec<u32>> = (0..7).map(|i| vec![((seed * 7 + i * 5) % 20) as u32]).collect();
            let inst = Instance::from_starts(24, 4, 3, &starts, seed).unwrap();
            let mut g = build_conflict_graph(&inst);
            if seed % 2 == 0 {
                g.add_edge(0, 6).ok();
                g.add_edge(1, 3).ok();
            }
            let vs: Vec<usize> = (0..7).collect();
            let chi = chromatic_brute(&g, &vs);
            assert!(color_within(&g, &vs, chi).is_some());
            assert!(chi == 1 || color_within(&g, &vs, chi - 1).is_none());
        }
    }
}
