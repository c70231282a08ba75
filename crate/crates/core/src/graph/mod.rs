//! Simple undirected graphs on the vertex set `0..n`.
//!
//! Edges are stored as ordered pairs `(u, v)` with `u < v`, sorted
//! lexicographically, so iteration order is deterministic.

mod generate;
mod io;

pub use generate::{generate, random_chordal, GraphFamily};
pub use io::{parse_edge_list, write_edge_list};

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Unordered vertex pair, normalized so that the smaller index comes first.
pub type Edge = (usize, usize);

/// Normalize a vertex pair.
#[inline]
pub fn edge(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Build a graph, rejecting loops, out-of-range endpoints and repeated edges.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Parameter(format!("loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Parameter(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            list.push(edge(u, v));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Parameter(format!("repeated edge {:?}", w[0])));
        }
        Ok(Self::from_sorted(n, list))
    }

    /// Like [`Graph::new`] but silently drops loops and duplicates.
    pub fn simplify(n: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut list: Vec<Edge> = edges
            .into_iter()
            .filter(|&(u, v)| u != v && u < n && v < n)
            .map(|(u, v)| edge(u, v))
            .collect();
        list.sort_unstable();
        list.dedup();
        Self::from_sorted(n, list)
    }

    fn from_sorted(n: usize, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        Graph {
            n,
            edges,
            adjacency,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted(n, Vec::new())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Position of an edge in [`Graph::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&edge(u, v)).ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n as f64
        }
    }

    /// Common degree when the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adjacency.first().map(Vec::len)?;
        self.adjacency.iter().all(|nb| nb.len() == d).then_some(d)
    }

    /// Unordered pairs of distinct non-adjacent vertices, lexicographic.
    pub fn non_edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * self.n.saturating_sub(1) / 2
    }

    /// Whether the given vertices are pairwise adjacent.
    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            vertices[i + 1..]
                .iter()
                .all(|&v| u != v && self.has_edge(u, v))
        })
    }

    /// Breadth-first distances from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Component label per vertex, labels numbered in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &self.adjacency[u] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().iter().all(|&c| c == 0)
    }

    /// Two-colouring if one exists.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let mut side: Vec<Option<bool>> = vec![None; self.n];
        for s in 0..self.n {
            if side[s].is_some() {
                continue;
            }
            side[s] = Some(false);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                let su = side[u].unwrap();
                for &w in &self.adjacency[u] {
                    match side[w] {
                        None => {
                            side[w] = Some(!su);
                            queue.push_back(w);
                        }
                        Some(sw) if sw == su => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(side.into_iter().map(Option::unwrap).collect())
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// Length of a shortest cycle, `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; self.n];
        let mut parent = vec![usize::MAX; self.n];
        for root in 0..self.n {
            dist.fill(usize::MAX);
            parent.fill(usize::MAX);
            dist[root] = 0;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                if let Some(b) = best {
                    if 2 * dist[u] >= b {
                        break;
                    }
                }
                for &w in &self.adjacency[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if parent[u] != w {
                        let len = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    pub fn delete_edge(&self, u: usize, v: usize) -> Result<Graph> {
        let e = edge(u, v);
        let pos = self
            .edge_index(u, v)
            .ok_or_else(|| Error::Parameter(format!("{e:?} is not an edge")))?;
        let mut edges = self.edges.clone();
        edges.remove(pos);
        Ok(Self::from_sorted(self.n, edges))
    }

    /// Merge the endpoints of an edge into the smaller index, relabel the
    /// remaining vertices compactly and drop loops and parallel edges.
    pub fn contract_edge(&self, u: usize, v: usize) -> Result<Graph> {
        let (keep, gone) = edge(u, v);
        if !self.has_edge(keep, gone) {
            return Err(Error::Parameter(format!("{:?} is not an edge", (keep, gone))));
        }
        let relabel = |w: usize| {
            let w = if w == gone { keep } else { w };
            if w > gone {
                w - 1
            } else {
                w
            }
        };
        Ok(Self::simplify(
            self.n - 1,
            self.edges.iter().map(|&(a, b)| (relabel(a), relabel(b))),
        ))
    }

    /// Subgraph induced on `vertices`, relabelled by position in the slice.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        Self::simplify(
            vertices.len(),
            self.edges
                .iter()
                .filter(|&&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
                .map(|&(a, b)| (index[a], index[b])),
        )
    }

    /// 0/1 adjacency matrix in row-major order.
    pub fn adjacency_matrix(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for &(u, v) in &self.edges {
            m[u][v] = 1.0;
            m[v][u] = 1.0;
        }
        m
    }
}

/// Largest `v(H)^v(G)` accepted by [`hom_density`].
pub const HOM_DENSITY_LIMIT: f64 = 1e8;

/// Probability that a uniformly random map `V(g) -> V(h)` sends edges to edges.
pub fn hom_density(g: &Graph, h: &Graph) -> Result<f64> {
    let (k, m) = (g.vertex_count(), h.vertex_count());
    if m == 0 {
        return Err(Error::Parameter("target graph has no vertices".into()));
    }
    let total = (m as f64).powi(k as i32);
    if total > HOM_DENSITY_LIMIT {
        return Err(Error::Refused(format!(
            "{m}^{k} maps exceed the brute-force limit"
        )));
    }
    // Earlier neighbours of each vertex in the assignment order 0..k.
    let back: Vec<Vec<usize>> = (0..k)
        .map(|u| g.neighbors(u).iter().copied().filter(|&w| w < u).collect())
        .collect();
    let mut image = vec![0usize; k];
    let count = count_homs(0, &back, h, &mut image);
    Ok(count as f64 / total)
}

fn count_homs(u: usize, back: &[Vec<usize>], h: &Graph, image: &mut [usize]) -> u64 {
    if u == back.len() {
        return 1;
    }
    let mut total = 0;
    for target in 0..h.vertex_count() {
        if back[u].iter().all(|&w| h.has_edge(image[w], target)) {
            image[u] = target;
            total += count_homs(u + 1, back, h, image);
        }
    }
    total
}

/// Every labelled graph on `1..=max_vertices` vertices with at least one edge.
pub fn small_targets(max_vertices: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for k in 2..=max_vertices {
        let pairs: Vec<Edge> = (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect();
        for mask in 1u64..(1 << pairs.len()) {
            let edges = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]);
            out.push(Graph::from_sorted(k, edges.collect()));
        }
    }
    out
}

impl Graph {
    /// Size of a largest clique containing the edge `(u, v)`.
    pub fn largest_clique_through(&self, u: usize, v: usize) -> usize {
        let common: Vec<usize> = self.adjacency[u]
            .iter()
            .copied()
            .filter(|&w| self.has_edge(v, w))
            .collect();
        2 + self.max_clique_within(&common)
    }

    fn max_clique_within(&self, candidates: &[usize]) -> usize {
        let mut best = 0;
        for (i, &w) in candidates.iter().enumerate() {
            let rest: Vec<usize> = candidates[i + 1..]
                .iter()
                .copied()
                .filter(|&r| self.has_edge(w, r))
                .collect();
            if 1 + rest.len() > best {
                best = best.max(1 + self.max_clique_within(&rest));
            }
        }
        best
    }
}
