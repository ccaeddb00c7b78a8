//! Neighbourhood growth, variance counterexamples and random test graphs.

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::graph::Graph;
use crate::par;
use crate::propagation::{exact_variance_curve, OperatorSpec, DEFAULT_EXACT_CAP};
use crate::rng::{trial_rng, Stream};

/// Above this many nodes, BFS runs from a sample of roots.
pub const FULL_BFS_LIMIT: usize = 2000;
pub const SAMPLED_ROOTS: usize = 100;

/// Strict increases smaller than this are treated as rounding.
pub const INCREASE_TOLERANCE: f64 = 1e-12;

/// Shell `|Γ_k|` and ball `|N_k|` sizes per distance `k = 0..=max_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodProfile {
    pub roots: usize,
    pub sampled: bool,
    /// False when the graph has several components; sizes are then per component.
    pub connected: bool,
    pub avg_shell: Vec<f64>,
    pub max_shell: Vec<usize>,
    pub avg_ball: Vec<f64>,
    pub max_ball: Vec<usize>,
}

pub fn neighborhood_profile(graph: &Graph, max_k: usize, seed: u64) -> NeighborhoodProfile {
    let n = graph.n_nodes();
    let (roots, sampled): (Vec<usize>, bool) = if n > FULL_BFS_LIMIT {
        let mut rng = trial_rng(seed, 0, Stream::Auxiliary);
        let mut r = sample(&mut rng, n, SAMPLED_ROOTS).into_vec();
        r.sort_unstable();
        (r, true)
    } else {
        ((0..n).collect(), false)
    };
    let shells: Vec<Vec<usize>> = par::map_indexed(roots.len(), |i| graph.shell_sizes(roots[i], max_k));
    let mut p = NeighborhoodProfile {
        roots: roots.len(),
        sampled,
        connected: graph.is_connected(),
        avg_shell: vec![0.0; max_k + 1],
        max_shell: vec![0; max_k + 1],
        avg_ball: vec![0.0; max_k + 1],
        max_ball: vec![0; max_k + 1],
    };
    for s in &shells {
        let mut ball = 0;
        for (k, &shell) in s.iter().enumerate().take(max_k + 1) {
            ball += shell;
            p.avg_shell[k] += shell as f64;
            p.avg_ball[k] += ball as f64;
            p.max_shell[k] = p.max_shell[k].max(shell);
            p.max_ball[k] = p.max_ball[k].max(ball);
        }
    }
    let r = roots.len().max(1) as f64;
    p.avg_shell.iter_mut().for_each(|v| *v /= r);
    p.avg_ball.iter_mut().for_each(|v| *v /= r);
    p
}

/// A node whose exact variance grew from `depth − 1` to `depth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceIncrease {
    pub graph_index: usize,
    pub node: usize,
    pub depth: usize,
    pub before: f64,
    pub after: f64,
}

/// Strict variance increases (beyond [`INCREASE_TOLERANCE`]) for depths
/// `1..=n_max` under `op`, with unit input variance.
pub fn variance_increases(graph: &Graph, graph_index: usize, op: OperatorSpec, n_max: usize) -> Result<Vec<VarianceIncrease>> {
    let curve = exact_variance_curve(graph, op, n_max, 1.0, DEFAULT_EXACT_CAP)?;
    let mut found = Vec::new();
    for depth in 1..=n_max {
        for node in 0..graph.n_nodes() {
            let (before, after) = (curve[depth - 1].per_node[node], curve[depth].per_node[node]);
            if after > before + INCREASE_TOLERANCE {
                found.push(VarianceIncrease {
                    graph_index,
                    node,
                    depth,
                    before,
                    after,
                });
            }
        }
    }
    Ok(found)
}

/// Random-walk variance increases over a family of small graphs.
pub fn counterexample_search(graphs: &[Graph], n_max: usize) -> Result<Vec<VarianceIncrease>> {
    let mut all = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        all.extend(variance_increases(g, i, OperatorSpec::RANDOM_WALK, n_max)?);
    }
    Ok(all)
}

/// Connected graph on `n` nodes: a random recursive tree plus every other
/// pair independently with probability `extra`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: f64) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < extra {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges, vec![1; n]).expect("edges are in range")
}

/// Family of `count` random connected graphs with `3..=max_nodes` nodes.
pub fn random_connected_family(count: usize, max_nodes: usize, seed: u64) -> Vec<Graph> {
    (0..count)
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64, Stream::Auxiliary);
            let n = rng.random_range(3..=max_nodes.max(3));
            let extra = rng.random_range(0.0..0.3);
            random_connected_graph(&mut rng, n, extra)
        })
        .collect()
}
