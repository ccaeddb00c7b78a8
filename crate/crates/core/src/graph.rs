//! Undirected simple graphs in compressed sparse row form.

use std::collections::VecDeque;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};

/// Undirected simple graph with per-node class labels.
///
/// Adjacency is stored as CSR with sorted neighbour lists, no self-loops and
/// no duplicates. Labels are contiguous class indices `1..=n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    degrees: Vec<usize>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl Graph {
    /// Build from an arbitrary edge list. Edges are symmetrised, self-loops
    /// dropped and duplicates collapsed.
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize)], labels: Vec<usize>) -> Result<Self> {
        if labels.len() != n_nodes {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} nodes",
                labels.len(),
                n_nodes
            )));
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
        for &(u, v) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {n_nodes} nodes"
                )));
            }
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Self::from_sorted_adjacency(adj, labels)
    }

    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>, labels: Vec<usize>) -> Result<Self> {
        let n_classes = labels.iter().copied().max().unwrap_or(0);
        if labels.contains(&0) {
            return Err(Error::InvalidParameter("labels are 1-based".into()));
        }
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(adj.iter().map(Vec::len).sum());
        let mut degrees = Vec::with_capacity(adj.len());
        for list in adj {
            degrees.push(list.len());
            neighbors.extend(list);
            offsets.push(neighbors.len());
        }
        Ok(Self {
            offsets,
            neighbors,
            degrees,
            labels,
            n_classes,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.degrees.len()
    }

    pub fn n_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&i| self.degrees[i] == 0).collect()
    }

    /// Propagation operators are undefined on isolated nodes.
    pub fn ensure_no_isolated(&self) -> Result<()> {
        match self.degrees.iter().position(|&d| d == 0) {
            Some(node) => Err(Error::DegenerateGraph { node }),
            None => Ok(()),
        }
    }

    /// Replace labels (must be 1-based and match the node count).
    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n_nodes() || labels.contains(&0) {
            return Err(Error::InvalidParameter("labels must be 1-based, one per node".into()));
        }
        self.n_classes = labels.iter().copied().max().unwrap_or(0);
        self.labels = labels;
        Ok(self)
    }

    /// Dense 0/1 adjacency. Only meant for small graphs.
    pub fn dense_adjacency(&self) -> Array2<f64> {
        let n = self.n_nodes();
        let mut a = Array2::zeros((n, n));
        for (u, v) in self.edges() {
            a[[u, v]] = 1.0;
            a[[v, u]] = 1.0;
        }
        a
    }

    // ---- structure ----

    /// Connected-component id per node, numbered in order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n_nodes();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for root in 0..n {
            if comp[root] != usize::MAX {
                continue;
            }
            comp[root] = next;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.n_nodes() == 0 || self.components().iter().all(|&c| c == 0)
    }

    /// Two-colouring by BFS parity, component by component.
    pub fn is_bipartite(&self) -> bool {
        let n = self.n_nodes();
        let mut colour = vec![u8::MAX; n];
        let mut queue = VecDeque::new();
        for root in 0..n {
            if colour[root] != u8::MAX {
                continue;
            }
            colour[root] = 0;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if colour[v] == u8::MAX {
                        colour[v] = 1 - colour[u];
                        queue.push_back(v);
                    } else if colour[v] == colour[u] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Neighbour-intersection scan over edges `u < v`.
    pub fn contains_triangle(&self) -> bool {
        self.edges().any(|(u, v)| {
            let (a, b) = (self.neighbors(u), self.neighbors(v));
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => return true,
                }
            }
            false
        })
    }

    /// Sizes of the BFS shells `|Γ_k(root)|` for `k = 0..=max_k`.
    pub fn shell_sizes(&self, root: usize, max_k: usize) -> Vec<usize> {
        let n = self.n_nodes();
        let mut dist = vec![usize::MAX; n];
        let mut shells = vec![0usize; max_k + 1];
        let mut queue = VecDeque::new();
        dist[root] = 0;
        shells[0] = 1;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du == max_k {
                continue;
            }
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = du + 1;
                    shells[du + 1] += 1;
                    queue.push_back(v);
                }
            }
        }
        shells
    }

    // ---- small named graphs ----

    fn unlabelled(n: usize, edges: &[(usize, usize)]) -> Self {
        Self::from_edges(n, edges, vec![1; n]).expect("fixture edges are in range")
    }

    /// Star `K_{1,leaves}` with the centre at index 0.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Self::unlabelled(leaves + 1, &edges)
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::unlabelled(n, &edges)
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::unlabelled(n, &edges)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self::unlabelled(n, &edges)
    }

    /// Circulant graph: `i ~ i ± s (mod n)` for each offset `s`.
    pub fn circulant(n: usize, offsets: &[usize]) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| offsets.iter().map(move |&s| (i, (i + s) % n)))
            .collect();
        Self::unlabelled(n, &edges)
    }

    /// Triangle 0-1-2 with a pendant node 3 attached to 0; degrees (3, 2, 2, 1).
    pub fn triangle_with_pendant() -> Self {
        Self::unlabelled(4, &[(0, 1), (1, 2), (2, 0), (0, 3)])
    }
}

/// Node feature matrix, optionally with the generative class means.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub matrix: Array2<f64>,
    pub class_means: Option<(f64, f64)>,
}

impl Features {
    pub fn new(matrix: Array2<f64>) -> Self {
        Self {
            matrix,
            class_means: None,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Extra information returned alongside an ingested graph.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub isolated_nodes: Vec<usize>,
    pub has_isolated: bool,
    pub self_loops_dropped: usize,
    pub duplicate_edges_collapsed: usize,
    /// Original label values, indexed by the contiguous class index minus one.
    pub original_labels: Vec<i64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrises_and_drops_loops() {
        let g = Graph::from_edges(2, &[(0, 1), (1, 0), (1, 1)], vec![1, 2]).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.degrees(), &[1, 1]);
        assert_eq!(g.n_classes(), 2);
    }

    #[test]
    fn named_graph_degrees() {
        assert_eq!(Graph::triangle_with_pendant().degrees(), &[3, 2, 2, 1]);
        assert_eq!(Graph::star(3).degrees(), &[3, 1, 1, 1]);
        assert!(Graph::complete(5).degrees().iter().all(|&d| d == 4));
        assert!(Graph::circulant(10, &[1, 2]).degrees().iter().all(|&d| d == 4));
    }

    #[test]
    fn triangle_and_bipartite() {
        let c4 = Graph::cycle(4);
        assert!(!c4.contains_triangle());
        assert!(c4.is_bipartite());
        let k3 = Graph::complete(3);
        assert!(k3.contains_triangle());
        assert!(!k3.is_bipartite());
        assert!(!Graph::cycle(5).is_bipartite());
        assert!(!Graph::cycle(5).contains_triangle());
    }

    #[test]
    fn shells() {
        assert_eq!(Graph::path(3).shell_sizes(0, 2), vec![1, 1, 1]);
        assert_eq!(Graph::complete(5).shell_sizes(2, 1), vec![1, 4]);
        assert_eq!(Graph::cycle(6).shell_sizes(0, 4), vec![1, 2, 2, 1, 0]);
    }

    #[test]
    fn isolated_nodes_are_rejected() {
        let g = Graph::from_edges(3, &[(0, 1)], vec![1, 1, 2]).unwrap();
        assert_eq!(g.isolated_nodes(), vec![2]);
        assert!(matches!(g.ensure_no_isolated(), Err(Error::DegenerateGraph { node: 2 })));
        assert!(!g.is_connected());
    }
}
