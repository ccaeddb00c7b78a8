//! Two-class contextual stochastic block model.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Features, Graph};
use crate::rng::{trial_rng, Stream};

/// Logarithm base used for `a = Np / log N` and the depth scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Ten => x.log10(),
            LogBase::Two => x.log2(),
        }
    }
}

/// Generative parameters of a CSBM instance.
///
/// Class 1 occupies node indices `0..N/2`, class 2 the rest. Homophily
/// (`p > q`) is not enforced here; [`check_regime`] reports it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsbmParams {
    pub n_nodes: usize,
    pub p_intra: f64,
    pub q_inter: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma2: f64,
    #[serde(default = "one")]
    pub feature_dim: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl Default for CsbmParams {
    /// The two-block setting used throughout the synthetic experiments:
    /// N = 2000, p = 0.0114, q = 0.0038, μ = (1, 1.5), σ² = 1.
    fn default() -> Self {
        Self {
            n_nodes: 2000,
            p_intra: 0.0114,
            q_inter: 0.0038,
            mu1: 1.0,
            mu2: 1.5,
            sigma2: 1.0,
            feature_dim: 1,
            seed: 0,
        }
    }
}

impl CsbmParams {
    pub fn new(n_nodes: usize, p_intra: f64, q_inter: f64) -> Result<Self> {
        let params = Self {
            n_nodes,
            p_intra,
            q_inter,
            ..Self::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_means(mut self, mu1: f64, mu2: f64) -> Result<Self> {
        self.mu1 = mu1;
        self.mu2 = mu2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Result<Self> {
        self.sigma2 = sigma2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dim(mut self, feature_dim: usize) -> Result<Self> {
        self.feature_dim = feature_dim;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_nodes < 2 || !self.n_nodes.is_multiple_of(2) {
            return bad(format!("n_nodes must be even and at least 2, got {}", self.n_nodes));
        }
        for (name, v) in [("p_intra", self.p_intra), ("q_inter", self.q_inter)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return bad(format!("sigma2 must be positive and finite, got {}", self.sigma2));
        }
        if !(self.mu1.is_finite() && self.mu2.is_finite() && self.mu1 < self.mu2) {
            return bad(format!("need mu1 < mu2, got {} and {}", self.mu1, self.mu2));
        }
        if self.feature_dim == 0 {
            return bad("feature_dim must be at least 1".into());
        }
        Ok(())
    }

    pub fn class_size(&self) -> usize {
        self.n_nodes / 2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// μ₂ − μ₁.
    pub fn mean_gap(&self) -> f64 {
        self.mu2 - self.mu1
    }

    /// Labels in canonical block order.
    pub fn labels(&self) -> Vec<usize> {
        let h = self.class_size();
        (0..self.n_nodes).map(|i| if i < h { 1 } else { 2 }).collect()
    }
}

/// Density diagnostics for a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    /// `(Np / log N, Nq / log N)`.
    pub log_density_ratio: (f64, f64),
    pub a_parameter: f64,
    pub homophilous: bool,
    pub regime_ok: bool,
}

pub fn check_regime(params: &CsbmParams) -> RegimeReport {
    check_regime_in(params, LogBase::Natural)
}

pub fn check_regime_in(params: &CsbmParams, base: LogBase) -> RegimeReport {
    let n = params.n_nodes as f64;
    let log_n = base.log(n);
    let np = n * params.p_intra;
    let nq = n * params.q_inter;
    let homophilous = params.p_intra > params.q_inter && params.q_inter > 0.0;
    RegimeReport {
        log_density_ratio: (np / log_n, nq / log_n),
        a_parameter: np / log_n,
        homophilous,
        regime_ok: homophilous && np >= log_n && nq >= log_n,
    }
}

/// `(p − q) / (p + q)`, taken as 0 for an empty model.
pub fn contraction_ratio(p: f64, q: f64) -> f64 {
    if p + q == 0.0 {
        0.0
    } else {
        (p - q) / (p + q)
    }
}

/// The two nonzero eigenvalues of the population operator `D̄⁻¹Ā`.
pub fn expected_operator_spectrum(params: &CsbmParams) -> (f64, f64) {
    (1.0, contraction_ratio(params.p_intra, params.q_inter))
}

/// Draw a graph for one trial. Each pair is an edge independently with
/// probability `p` (same class) or `q` (different classes).
pub fn sample_graph(params: &CsbmParams, trial_index: u64) -> Graph {
    let mut rng = trial_rng(params.seed, trial_index, Stream::Graph);
    let h = params.class_size();
    let n = params.n_nodes;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut add = |u: usize, v: usize| {
        adj[u].push(v);
        adj[v].push(u);
    };
    sample_triangle(&mut rng, h, params.p_intra, &mut add);
    sample_triangle(&mut rng, h, params.p_intra, |u, v| add(u + h, v + h));
    sample_rectangle(&mut rng, h, h, params.q_inter, |u, v| add(u, v + h));
    for list in &mut adj {
        list.sort_unstable();
    }
    Graph::from_sorted_adjacency(adj, params.labels()).expect("block labels are valid")
}

/// Number of failures before the next success of a Bernoulli(p) sequence.
fn geometric_skip<R: Rng>(rng: &mut R, log_q: f64) -> u64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let s = (u.ln() / log_q).floor();
    if s >= u64::MAX as f64 {
        u64::MAX
    } else {
        s as u64
    }
}

/// Pairs `(v, w)` with `w < v < m`, visited by geometric skipping.
fn sample_triangle<R: Rng, F: FnMut(usize, usize)>(rng: &mut R, m: usize, p: f64, mut emit: F) {
    if p <= 0.0 || m < 2 {
        return;
    }
    if p >= 1.0 {
        for v in 1..m {
            for w in 0..v {
                emit(v, w);
            }
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w) = (1u64, -1i64);
    let m = m as u64;
    while v < m {
        let skip = geometric_skip(rng, log_q);
        w = w.saturating_add(1).saturating_add(skip.min(i64::MAX as u64) as i64);
        while w >= v as i64 && v < m {
            w -= v as i64;
            v += 1;
        }
        if v < m {
            emit(v as usize, w as usize);
        }
    }
}

/// Pairs `(i, j)` in `[0, rows) × [0, cols)`.
fn sample_rectangle<R: Rng, F: FnMut(usize, usize)>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    q: f64,
    mut emit: F,
) {
    let total = (rows as u64) * (cols as u64);
    if q <= 0.0 || total == 0 {
        return;
    }
    if q >= 1.0 {
        for i in 0..rows {
            for j in 0..cols {
                emit(i, j);
            }
        }
        return;
    }
    let log_q = (1.0 - q).ln();
    let mut k: u64 = 0;
    loop {
        k = match k.checked_add(geometric_skip(rng, log_q)) {
            Some(k) if k < total => k,
            _ => break,
        };
        emit((k / cols as u64) as usize, (k % cols as u64) as usize);
        k += 1;
    }
}

/// Gaussian features: node `v` of class `i` gets `d` independent draws from
/// `N(μᵢ, σ²)`. Rows are drawn in node order.
pub fn sample_features(params: &CsbmParams, labels: &[usize], trial_index: u64) -> Result<Features> {
    if labels.len() != params.n_nodes {
        return Err(Error::InvalidParameter(format!(
            "{} labels for {} nodes",
            labels.len(),
            params.n_nodes
        )));
    }
    let mut rng = trial_rng(params.seed, trial_index, Stream::Features);
    let noise = Normal::new(0.0, params.sigma()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let d = params.feature_dim;
    let mut matrix = Array2::zeros((labels.len(), d));
    for (row, &label) in matrix.rows_mut().into_iter().zip(labels) {
        let mu = match label {
            1 => params.mu1,
            2 => params.mu2,
            other => {
                return Err(Error::InvalidParameter(format!("CSBM label {other} is not 1 or 2")))
            }
        };
        for x in row {
            *x = mu + noise.sample(&mut rng);
        }
    }
    Ok(Features {
        matrix,
        class_means: Some((params.mu1, params.mu2)),
    })
}

/// Graph and features for one trial.
pub fn sample_instance(params: &CsbmParams, trial_index: u64) -> Result<(Graph, Features)> {
    params.validate()?;
    let graph = sample_graph(params, trial_index);
    let features = sample_features(params, graph.labels(), trial_index)?;
    Ok((graph, features))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn validation() {
        assert!(CsbmParams::new(3, 0.5, 0.1).is_err());
        assert!(CsbmParams::new(4, 1.5, 0.1).is_err());
        assert!(CsbmParams::new(4, 0.5, 0.1).unwrap().with_sigma2(0.0).is_err());
        assert!(CsbmParams::new(4, 0.5, 0.1).unwrap().with_means(2.0, 1.0).is_err());
        assert!(CsbmParams::new(4, 0.5, 0.1).unwrap().with_dim(0).is_err());
    }

    #[test]
    fn full_and_block_diagonal_graphs() {
        let k4 = sample_graph(&CsbmParams::new(4, 1.0, 1.0).unwrap(), 0);
        assert_eq!(k4.degrees(), &[3, 3, 3, 3]);
        let two = sample_graph(&CsbmParams::new(4, 1.0, 0.0).unwrap(), 0);
        assert_eq!(two.degrees(), &[1, 1, 1, 1]);
        assert!(two.has_edge(0, 1) && two.has_edge(2, 3));
        assert_eq!(two.labels(), &[1, 1, 2, 2]);
    }

    #[test]
    fn triangle_skipping_covers_every_pair_once() {
        let mut seen = Vec::new();
        let mut rng = trial_rng(1, 0, Stream::Graph);
        sample_triangle(&mut rng, 6, 1.0 - 1e-15, |v, w| seen.push((v, w)));
        let expect: Vec<_> = (1..6).flat_map(|v| (0..v).map(move |w| (v, w))).collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn regime_examples() {
        let r = check_regime(&CsbmParams::default());
        assert_relative_eq!(r.a_parameter, 22.8 / 2000f64.ln(), max_relative = 1e-12);
        assert!((r.a_parameter - 3.0).abs() < 0.01);
        // Nq = 7.6 sits just under ln 2000 ≈ 7.601.
        assert!(r.homophilous && !r.regime_ok);
        assert!(r.log_density_ratio.1 < 1.0 && r.log_density_ratio.1 > 0.999);
        let flat = CsbmParams::new(2000, 0.0038, 0.0038).unwrap();
        assert!(!check_regime(&flat).homophilous);
        let sparse = CsbmParams::new(100, 0.01, 0.005).unwrap();
        assert!(!check_regime(&sparse).regime_ok);
    }

    #[test]
    fn spectrum_examples() {
        assert_relative_eq!(expected_operator_spectrum(&CsbmParams::default()).1, 0.5, max_relative = 1e-15);
        assert_eq!(expected_operator_spectrum(&CsbmParams::new(10, 0.3, 0.3).unwrap()), (1.0, 0.0));
        assert_eq!(expected_operator_spectrum(&CsbmParams::new(10, 0.3, 0.0).unwrap()), (1.0, 1.0));
    }

    #[test]
    fn feature_label_mismatch() {
        let p = CsbmParams::new(4, 0.5, 0.1).unwrap();
        assert!(sample_features(&p, &[1, 2], 0).is_err());
    }
}
