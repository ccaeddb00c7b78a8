//! Message-passing operators and exact per-node variance profiles.
//!
//! All operators are applied as sparse mat-vecs over the CSR graph. Rows of
//! the output are independent, so they may be filled by any number of
//! workers; each row is reduced in neighbour order, which keeps results
//! bitwise identical across worker counts.

use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;

/// Default node-count cap for exact variance computations.
pub const DEFAULT_EXACT_CAP: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    /// `D⁻¹A`.
    RandomWalk,
    /// `D^{-1/2} A D^{-1/2}`.
    Symmetric,
    /// `α Σ_{k≤K} (1−α)^k (D⁻¹A)^k`.
    Ppnp { alpha: f64, truncation: usize },
    /// `H ← (1−α) D⁻¹A H + α X`.
    Appnp { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    #[serde(flatten)]
    pub kind: OperatorKind,
    #[serde(default)]
    pub terminal_relu: bool,
}

impl OperatorSpec {
    pub const RANDOM_WALK: Self = Self::linear(OperatorKind::RandomWalk);
    pub const SYMMETRIC: Self = Self::linear(OperatorKind::Symmetric);

    pub const fn linear(kind: OperatorKind) -> Self {
        Self {
            kind,
            terminal_relu: false,
        }
    }

    pub fn appnp(alpha: f64) -> Self {
        Self::linear(OperatorKind::Appnp { alpha })
    }

    pub fn ppnp(alpha: f64, truncation: usize) -> Self {
        Self::linear(OperatorKind::Ppnp { alpha, truncation })
    }

    pub fn with_relu(mut self) -> Self {
        self.terminal_relu = true;
        self
    }

    /// APPNP accepts `α ∈ [0, 1]`; `α = 0` reduces it to the random walk.
    /// PPNP needs `α ∈ (0, 1]` and `K ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            OperatorKind::Appnp { alpha } if !(0.0..=1.0).contains(&alpha) => Err(
                Error::InvalidParameter(format!("APPNP alpha must be in [0, 1], got {alpha}")),
            ),
            OperatorKind::Ppnp { alpha, .. } if !(alpha > 0.0 && alpha <= 1.0) => Err(
                Error::InvalidParameter(format!("PPNP alpha must be in (0, 1], got {alpha}")),
            ),
            OperatorKind::Ppnp { truncation: 0, .. } => {
                Err(Error::InvalidParameter("PPNP truncation must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Short stable name, e.g. `rw`, `sym`, `appnp(0.1)`, `ppnp(0.1,50)+relu`.
    pub fn label(&self) -> String {
        let base = match self.kind {
            OperatorKind::RandomWalk => "rw".to_string(),
            OperatorKind::Symmetric => "sym".to_string(),
            OperatorKind::Appnp { alpha } => format!("appnp({alpha})"),
            OperatorKind::Ppnp { alpha, truncation } => format!("ppnp({alpha},{truncation})"),
        };
        if self.terminal_relu {
            base + "+relu"
        } else {
            base
        }
    }
}

/// Node features after `depth` applications of `operator`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRepresentations {
    pub matrix: Array2<f64>,
    pub depth: usize,
    pub operator: OperatorSpec,
}

/// Per-node variance `σ² Σ_j (p_ij^{(n)})²` of a depth-`n` operator.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    pub per_node: Vec<f64>,
    pub depth: usize,
    pub sigma2_input: f64,
}

impl VarianceProfile {
    pub fn mean(&self) -> f64 {
        self.per_node.iter().sum::<f64>() / self.per_node.len() as f64
    }
}

fn check_shape(graph: &Graph, h: &Array2<f64>) -> Result<()> {
    if h.nrows() != graph.n_nodes() {
        return Err(Error::InvalidParameter(format!(
            "representation has {} rows, graph has {} nodes",
            h.nrows(),
            graph.n_nodes()
        )));
    }
    Ok(())
}

/// Row `i` of the output is `Σ_{j ~ i} w(i, j) H[j]`, filled row-parallel.
fn aggregate<W>(graph: &Graph, h: &Array2<f64>, weight: W) -> Array2<f64>
where
    W: Fn(usize, usize) -> f64 + Send + Sync,
{
    let (n, d) = h.dim();
    let h = h.as_standard_layout();
    let src = h.as_slice().expect("standard layout");
    let mut out = vec![0.0; n * d];
    par::for_each_chunk(&mut out, d.max(1), |i, row| {
        for &j in graph.neighbors(i) {
            let w = weight(i, j);
            let hj = &src[j * d..(j + 1) * d];
            for (o, &x) in row.iter_mut().zip(hj) {
                *o += w * x;
            }
        }
    });
    Array2::from_shape_vec((n, d), out).expect("shape matches buffer")
}

/// `D⁻¹A H`: each row becomes the mean of its neighbours' rows.
pub fn rw_step(graph: &Graph, h: &Array2<f64>) -> Result<Array2<f64>> {
    graph.ensure_no_isolated()?;
    check_shape(graph, h)?;
    let inv: Vec<f64> = graph.degrees().iter().map(|&d| 1.0 / d as f64).collect();
    Ok(aggregate(graph, h, |i, _| inv[i]))
}

/// `D^{-1/2} A D^{-1/2} H`.
pub fn sym_step(graph: &Graph, h: &Array2<f64>) -> Result<Array2<f64>> {
    graph.ensure_no_isolated()?;
    check_shape(graph, h)?;
    let inv_sqrt: Vec<f64> = graph.degrees().iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    Ok(aggregate(graph, h, |i, j| inv_sqrt[i] * inv_sqrt[j]))
}

/// `(1−α) D⁻¹A H + α X`.
pub fn appnp_step(graph: &Graph, h: &Array2<f64>, x: &Array2<f64>, alpha: f64) -> Result<Array2<f64>> {
    if h.dim() != x.dim() {
        return Err(Error::InvalidParameter("H and X shapes differ".into()));
    }
    let mut out = rw_step(graph, h)?;
    Zip::from(&mut out).and(x).for_each(|o, &xv| *o = (1.0 - alpha) * *o + alpha * xv);
    Ok(out)
}

/// Truncated personalised-PageRank propagation by Horner accumulation.
/// Returns the output and the neglected mass `(1−α)^{K+1}`.
pub fn ppnp(graph: &Graph, x: &Array2<f64>, alpha: f64, truncation: usize) -> Result<(Array2<f64>, f64)> {
    OperatorSpec::ppnp(alpha, truncation).validate()?;
    graph.ensure_no_isolated()?;
    let mut acc = x.clone();
    for _ in 0..truncation {
        let mut next = rw_step(graph, &acc)?;
        Zip::from(&mut next).and(x).for_each(|o, &xv| *o = xv + (1.0 - alpha) * *o);
        acc = next;
    }
    acc.mapv_inplace(|v| alpha * v);
    Ok((acc, (1.0 - alpha).powi(truncation as i32 + 1)))
}

fn relu(mut h: Array2<f64>) -> Array2<f64> {
    h.mapv_inplace(|v| v.max(0.0));
    h
}

/// Incremental propagation: yields depth 0, 1, 2, ... with each depth
/// computed from the previous one.
pub struct Propagator<'a> {
    graph: &'a Graph,
    x: &'a Array2<f64>,
    op: OperatorSpec,
    state: Array2<f64>,
    depth: usize,
}

impl<'a> Propagator<'a> {
    pub fn new(graph: &'a Graph, x: &'a Array2<f64>, op: OperatorSpec) -> Result<Self> {
        op.validate()?;
        check_shape(graph, x)?;
        graph.ensure_no_isolated()?;
        Ok(Self {
            graph,
            x,
            op,
            state: x.clone(),
            depth: 0,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// The linear state at the current depth, before any terminal ReLU.
    pub fn linear_state(&self) -> &Array2<f64> {
        &self.state
    }

    /// The representation at the current depth, with the terminal ReLU applied if set.
    pub fn current(&self) -> NodeRepresentations {
        let matrix = if self.op.terminal_relu {
            relu(self.state.clone())
        } else {
            self.state.clone()
        };
        NodeRepresentations {
            matrix,
            depth: self.depth,
            operator: self.op,
        }
    }

    pub fn advance(&mut self) -> Result<()> {
        self.state = match self.op.kind {
            OperatorKind::RandomWalk => rw_step(self.graph, &self.state)?,
            OperatorKind::Symmetric => sym_step(self.graph, &self.state)?,
            OperatorKind::Appnp { alpha } => appnp_step(self.graph, &self.state, self.x, alpha)?,
            OperatorKind::Ppnp { alpha, truncation } => {
                if self.depth == 0 {
                    ppnp(self.graph, self.x, alpha, truncation)?.0
                } else {
                    std::mem::take(&mut self.state)
                }
            }
        };
        self.depth += 1;
        Ok(())
    }
}

/// Representation after `n` propagation steps. Depth 0 returns `X`
/// (through the terminal ReLU if set); PPNP ignores `n ≥ 1` and returns the truncated series.
pub fn propagate(graph: &Graph, x: &Array2<f64>, op: OperatorSpec, n: usize) -> Result<NodeRepresentations> {
    if n == 0 {
        op.validate()?;
        check_shape(graph, x)?;
        return Ok(NodeRepresentations {
            matrix: if op.terminal_relu { relu(x.clone()) } else { x.clone() },
            depth: 0,
            operator: op,
        });
    }
    let mut prop = Propagator::new(graph, x, op)?;
    let steps = match op.kind {
        OperatorKind::Ppnp { .. } => 1,
        _ => n,
    };
    for _ in 0..steps {
        prop.advance()?;
    }
    let mut reps = prop.current();
    reps.depth = n;
    Ok(reps)
}

/// Neumaier-compensated sum of squares.
pub fn sum_of_squares(values: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values {
        let x = v * v;
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Left multiplication `v ← v P` for a per-edge weight `w(i, j)` of `P[i, j]`.
fn left_step<W: Fn(usize, usize) -> f64>(graph: &Graph, v: &[f64], out: &mut [f64], weight: &W) {
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &i in graph.neighbors(j) {
            acc += v[i] * weight(i, j);
        }
        *o = acc;
    }
}

/// Squared row norms of `M_n` for `n = 0..=n_max`, one node at a time.
/// Returns an `(n_max + 1) × N` array of unscaled norms.
fn row_norm_curve(graph: &Graph, op: &OperatorSpec, n_max: usize) -> Array2<f64> {
    let n = graph.n_nodes();
    let degs = graph.degrees();
    let inv: Vec<f64> = degs.iter().map(|&d| 1.0 / d as f64).collect();
    let inv_sqrt: Vec<f64> = degs.iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let rw = |i: usize, _j: usize| inv[i];
    let sym = |i: usize, j: usize| inv_sqrt[i] * inv_sqrt[j];

    let columns: Vec<Vec<f64>> = par::map_indexed(n, |root| {
        let mut norms = vec![0.0; n_max + 1];
        let mut v = vec![0.0; n];
        let mut next = vec![0.0; n];
        v[root] = 1.0;
        norms[0] = 1.0;
        match op.kind {
            OperatorKind::RandomWalk | OperatorKind::Symmetric => {
                for slot in norms.iter_mut().skip(1) {
                    if matches!(op.kind, OperatorKind::Symmetric) {
                        left_step(graph, &v, &mut next, &sym);
                    } else {
                        left_step(graph, &v, &mut next, &rw);
                    }
                    std::mem::swap(&mut v, &mut next);
                    *slot = sum_of_squares(&v);
                }
            }
            OperatorKind::Appnp { alpha } => {
                // M_n = α Σ_{k<n} (1−α)^k P^k + (1−α)^n P^n
                let mut acc = vec![0.0; n];
                let mut weight = 1.0;
                let mut row = vec![0.0; n];
                for slot in norms.iter_mut().skip(1) {
                    for (a, &x) in acc.iter_mut().zip(&v) {
                        *a += alpha * weight * x;
                    }
                    left_step(graph, &v, &mut next, &rw);
                    std::mem::swap(&mut v, &mut next);
                    weight *= 1.0 - alpha;
                    for ((r, &a), &x) in row.iter_mut().zip(&acc).zip(&v) {
                        *r = a + weight * x;
                    }
                    *slot = sum_of_squares(&row);
                }
            }
            OperatorKind::Ppnp { alpha, truncation } => {
                let mut acc: Vec<f64> = v.iter().map(|&x| alpha * x).collect();
                let mut weight = alpha;
                for _ in 0..truncation {
                    left_step(graph, &v, &mut next, &rw);
                    std::mem::swap(&mut v, &mut next);
                    weight *= 1.0 - alpha;
                    for (a, &x) in acc.iter_mut().zip(&v) {
                        *a += weight * x;
                    }
                }
                let s = sum_of_squares(&acc);
                norms.iter_mut().skip(1).for_each(|slot| *slot = s);
            }
        }
        norms
    });

    let mut out = Array2::zeros((n_max + 1, n));
    for (node, col) in columns.into_iter().enumerate() {
        for (depth, v) in col.into_iter().enumerate() {
            out[[depth, node]] = v;
        }
    }
    out
}

/// Exact variance profiles for depths `0..=n_max`. Terminal ReLU is ignored;
/// the profile describes the linear operator.
pub fn exact_variance_curve(
    graph: &Graph,
    op: OperatorSpec,
    n_max: usize,
    sigma2: f64,
    cap: usize,
) -> Result<Vec<VarianceProfile>> {
    op.validate()?;
    graph.ensure_no_isolated()?;
    if graph.n_nodes() > cap {
        return Err(Error::TooLarge {
            n_nodes: graph.n_nodes(),
            cap,
        });
    }
    let norms = row_norm_curve(graph, &op, n_max);
    Ok(norms
        .outer_iter()
        .enumerate()
        .map(|(depth, row)| VarianceProfile {
            per_node: row.iter().map(|&v| sigma2 * v).collect(),
            depth,
            sigma2_input: sigma2,
        })
        .collect())
}

pub fn exact_variance_profile(graph: &Graph, op: OperatorSpec, n: usize, sigma2: f64) -> Result<VarianceProfile> {
    let mut curve = exact_variance_curve(graph, op, n, sigma2, DEFAULT_EXACT_CAP)?;
    Ok(curve.pop().expect("curve has n + 1 entries"))
}

/// `‖d‖²/‖d‖₁²` evaluated on a degree vector.
pub fn degree_concentration_ratio(degrees: &[usize]) -> f64 {
    let d = Array1::from_iter(degrees.iter().map(|&x| x as f64));
    let s = d.sum();
    d.dot(&d) / (s * s)
}
