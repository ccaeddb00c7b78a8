//! Closed-form mean-gap, variance, z-score and Bayes-error curves.
//!
//! Products such as `(Np)^n (2/(N(p+q)))^{2n-2k}` overflow or underflow long
//! before the depths of interest, so every power is formed in log space and
//! only exponentiated at the end.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::csbm::{contraction_ratio, CsbmParams, LogBase};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::propagation::OperatorKind;

/// Constants of the mean-concentration statement. The constant is unknown
/// in closed form; harnesses report the value the data require.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub r_exponent: f64,
    pub constant_c: f64,
    pub horizon_k: usize,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            r_exponent: 1.0,
            constant_c: 1.0,
            horizon_k: 8,
        }
    }
}

impl ConcentrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_exponent > 0.0 && self.constant_c > 0.0 && self.horizon_k > 0) {
            return Err(Error::InvalidParameter(
                "concentration config fields must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// All closed-form quantities at one depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryBounds {
    pub depth: usize,
    pub mean_gap: f64,
    pub var_lower: f64,
    pub var_upper: f64,
    pub z_lower: f64,
    pub z_upper: f64,
    pub bayes_err_lower: f64,
    pub bayes_err_upper: f64,
    /// `var_lower ≤ var_upper`. Outside the dense regime the two bounds can cross.
    pub consistent: bool,
}

impl TheoryBounds {
    fn assemble(depth: usize, mean_gap: f64, (lo, hi): (f64, f64), feature_dim: usize) -> Self {
        let z_lower = zscore(mean_gap, hi);
        let z_upper = zscore(mean_gap, lo);
        let sd = (feature_dim as f64).sqrt();
        Self {
            depth,
            mean_gap,
            var_lower: lo,
            var_upper: hi,
            z_lower,
            z_upper,
            bayes_err_lower: normal_tail(sd * z_upper),
            bayes_err_upper: normal_tail(sd * z_lower),
            consistent: lo <= hi,
        }
    }

    /// The bounds, or a [`Error::BoundInconsistency`] if they cross.
    pub fn checked(self) -> Result<Self> {
        if self.consistent {
            Ok(self)
        } else {
            Err(Error::BoundInconsistency {
                depth: self.depth,
                lower: self.var_lower,
                upper: self.var_upper,
            })
        }
    }
}

/// `1 − Φ(x)` via the complementary error function. `statrs` evaluates
/// `erfc` with the rational approximations of the Boost math library.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `gap / (2 √var)`, formed in log space; 0 when the gap is 0.
pub fn zscore(gap: f64, var: f64) -> f64 {
    if gap == 0.0 {
        return 0.0;
    }
    let mag = (gap.abs().ln() - std::f64::consts::LN_2 - 0.5 * var.ln()).exp();
    mag.copysign(gap)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `a = Np / log N`.
pub fn a_parameter(params: &CsbmParams, base: LogBase) -> f64 {
    let n = params.n_nodes as f64;
    n * params.p_intra / base.log(n)
}

/// `min{a, 2}`.
pub fn a_min2(params: &CsbmParams, base: LogBase) -> f64 {
    a_parameter(params, base).min(2.0)
}

/// `((p − q)/(p + q))ⁿ (μ₂ − μ₁)`.
pub fn mean_gap(params: &CsbmParams, n: usize) -> f64 {
    let r = contraction_ratio(params.p_intra, params.q_inter);
    r.powi(n as i32) * params.mean_gap()
}

/// `C / √(N(p+q))`.
pub fn mean_gap_error(params: &CsbmParams, cfg: &ConcentrationConfig) -> f64 {
    cfg.constant_c / (params.n_nodes as f64 * (params.p_intra + params.q_inter)).sqrt()
}

/// Natural logs of the random-walk variance bounds divided by σ².
fn log_variance_bounds(params: &CsbmParams, n: usize, base: LogBase) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let big_n = params.n_nodes as f64;
    let np = big_n * params.p_intra;
    let m = a_min2(params, base);
    if np <= 0.0 || m <= 0.0 {
        return (0.0, 0.0);
    }
    let ln_np = np.ln();
    let nf = n as f64;
    let lower = ((m / 10.0).ln() - nf * ln_np).max(-big_n.ln());
    let ln_ratio = (2.0 / (big_n * (params.p_intra + params.q_inter))).ln();
    let terms: Vec<f64> = (0..=n / 2)
        .map(|k| {
            let j = (n - 2 * k) as f64;
            let k = k as f64;
            (9.0 / m).ln() + 2.0 * k * (j + 1.0).ln() + j * ln_np + (2.0 * nf - 2.0 * k) * ln_ratio
        })
        .collect();
    let upper = log_sum_exp(&terms).min(0.0);
    (lower, upper)
}

/// Random-walk variance bounds at depth `n`, natural log.
pub fn variance_bounds(params: &CsbmParams, n: usize) -> (f64, f64) {
    variance_bounds_in(params, n, LogBase::Natural)
}

pub fn variance_bounds_in(params: &CsbmParams, n: usize, base: LogBase) -> (f64, f64) {
    let (lo, hi) = log_variance_bounds(params, n, base);
    (lo.exp() * params.sigma2, hi.exp() * params.sigma2)
}

/// Fixed-horizon upper bound `min{(C_K/m) (N(p+q))^{-n}, 1} σ²`.
pub fn variance_bounds_fixed_k(params: &CsbmParams, n: usize, c_k: f64) -> f64 {
    let m = a_min2(params, LogBase::Natural);
    let s = params.n_nodes as f64 * (params.p_intra + params.q_inter);
    let log = (c_k / m).ln() - n as f64 * s.ln();
    log.min(0.0).exp() * params.sigma2
}

/// Both z-score bounds at depth `n`.
pub fn zscore_bounds(params: &CsbmParams, n: usize) -> (f64, f64) {
    let b = theory_bounds(params, n);
    (b.z_lower, b.z_upper)
}

/// Random-walk bounds at depth `n`.
pub fn theory_bounds(params: &CsbmParams, n: usize) -> TheoryBounds {
    theory_bounds_in(params, n, LogBase::Natural)
}

pub fn theory_bounds_in(params: &CsbmParams, n: usize, base: LogBase) -> TheoryBounds {
    TheoryBounds::assemble(n, mean_gap(params, n), variance_bounds_in(params, n, base), params.feature_dim)
}

/// `1 − Φ((√d / 2) · gap / σ)`.
pub fn bayes_error(mean_gap: f64, sigma: f64, d: usize) -> f64 {
    normal_tail((d as f64).sqrt() / 2.0 * mean_gap / sigma)
}

/// PPNP limit of the mean gap.
pub fn ppnp_mean_gap(params: &CsbmParams, alpha: f64) -> f64 {
    let (p, q) = (params.p_intra, params.q_inter);
    (p + q) / (p + (2.0 - alpha) / alpha * q) * params.mean_gap()
}

/// APPNP mean gap at depth `n`.
pub fn appnp_mean_gap(params: &CsbmParams, alpha: f64, n: usize) -> f64 {
    let (p, q) = (params.p_intra, params.q_inter);
    let steady = (p + q) / (p + (2.0 - alpha) / alpha * q);
    let transient = (2.0 - 2.0 * alpha) * q / (alpha * p + (2.0 - alpha) * q);
    let decay = ((1.0 - alpha) * contraction_ratio(p, q)).powi(n as i32);
    (steady + transient * decay) * params.mean_gap()
}

/// PPNP variance bounds with the outer maximum kept as stated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PpnpVariance {
    pub lower: f64,
    pub upper: f64,
    /// `α² (Σ_k (1−α)^k √var_upper(k) + (1−α)^{K+1} σ/α)²`.
    pub series_term: f64,
    /// Set when the series term exceeds σ².
    pub series_exceeds_input: bool,
}

pub fn ppnp_variance_bounds(params: &CsbmParams, alpha: f64, truncation: usize) -> PpnpVariance {
    let m = a_min2(params, LogBase::Natural);
    let s2 = params.sigma2;
    let lower = (alpha * alpha * m / 10.0).max(1.0 / params.n_nodes as f64) * s2;
    let mut sum = 0.0;
    let mut w = 1.0;
    for k in 0..=truncation {
        sum += w * variance_bounds(params, k).1.sqrt();
        w *= 1.0 - alpha;
    }
    let tail = w * params.sigma() / alpha;
    let series_term = (alpha * (sum + tail)).powi(2);
    PpnpVariance {
        lower,
        upper: series_term.max(s2),
        series_term,
        series_exceeds_input: series_term > s2,
    }
}

pub fn appnp_variance_bounds(params: &CsbmParams, alpha: f64, n: usize) -> (f64, f64) {
    if n == 0 {
        return (params.sigma2, params.sigma2);
    }
    let m = a_min2(params, LogBase::Natural);
    let big_n = params.n_nodes as f64;
    let np = big_n * params.p_intra;
    let s2 = params.sigma2;
    let decay = (2.0 * n as f64 * (1.0 - alpha).ln() - n as f64 * np.ln()).exp();
    let lower = (m / 10.0 * (alpha * alpha + decay)).max(1.0 / big_n) * s2;
    let mut sum = 0.0;
    let mut w = 1.0;
    for k in 0..n {
        sum += w * variance_bounds(params, k).1.sqrt();
        w *= 1.0 - alpha;
    }
    let upper = (alpha * sum + w * variance_bounds(params, n).1.sqrt()).powi(2).min(s2);
    (lower, upper)
}

/// `log N / log log N` in the chosen base.
pub fn depth_scale(n: f64, base: LogBase) -> f64 {
    let l = base.log(n);
    l / base.log(l)
}

/// `(10 / min{a,2}) (Np)ⁿ`, the bound on `|N_n|`.
pub fn neighborhood_bound(params: &CsbmParams, n: usize) -> f64 {
    let np = params.n_nodes as f64 * params.p_intra;
    10.0 / a_min2(params, LogBase::Natural) * np.powi(n as i32)
}

/// `(9 / min{a,2}) (Np)^j`, the bound on `|Γ_j|`.
pub fn shell_bound(params: &CsbmParams, j: usize) -> f64 {
    let np = params.n_nodes as f64 * params.p_intra;
    9.0 / a_min2(params, LogBase::Natural) * np.powi(j as i32)
}

/// [`neighborhood_bound`] capped at the graph size.
pub fn neighborhood_bound_capped(params: &CsbmParams, n: usize) -> f64 {
    neighborhood_bound(params, n).min(params.n_nodes as f64)
}

/// `‖d‖²/‖d‖₁²`, the limiting per-node variance (in units of σ²) of deep
/// random-walk propagation on a connected non-bipartite graph.
pub fn variance_limit(graph: &Graph) -> Result<f64> {
    if !graph.is_connected() {
        return Err(Error::Precondition("graph is not connected".into()));
    }
    if graph.is_bipartite() {
        return Err(Error::Precondition("graph is bipartite".into()));
    }
    Ok(crate::propagation::degree_concentration_ratio(graph.degrees()))
}

/// Closed-form curve for depths `0..=n_max` under `op`. PPNP has no depth
/// and repeats its single row. The symmetric operator has no closed form.
pub fn bound_curve(params: &CsbmParams, op: &OperatorKind, n_max: usize, base: LogBase) -> Result<Vec<TheoryBounds>> {
    params.validate()?;
    let d = params.feature_dim;
    match *op {
        OperatorKind::RandomWalk => Ok((0..=n_max).map(|n| theory_bounds_in(params, n, base)).collect()),
        OperatorKind::Appnp { alpha } => Ok((0..=n_max)
            .map(|n| {
                TheoryBounds::assemble(n, appnp_mean_gap(params, alpha, n), appnp_variance_bounds(params, alpha, n), d)
            })
            .collect()),
        OperatorKind::Ppnp { alpha, truncation } => {
            let v = ppnp_variance_bounds(params, alpha, truncation);
            let gap = ppnp_mean_gap(params, alpha);
            Ok((0..=n_max)
                .map(|n| TheoryBounds::assemble(n, gap, (v.lower, v.upper), d))
                .collect())
        }
        OperatorKind::Symmetric => Err(Error::Usage(
            "no closed-form bounds exist for the symmetric operator".into(),
        )),
    }
}
