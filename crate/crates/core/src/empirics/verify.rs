//! Empirical checks of the probabilistic statements.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::classify::{random_split, threshold_accuracy, SplitFractions};
use super::moments::monte_carlo_moments;
use super::stats::mean_stderr;
use super::structure::{neighborhood_profile, random_connected_family, variance_increases};
use crate::csbm::{sample_graph, sample_instance, CsbmParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;
use crate::propagation::{exact_variance_curve, propagate, OperatorSpec, DEFAULT_EXACT_CAP};
use crate::theory::{self, ConcentrationConfig};

/// Depth at which the variance limit is compared.
pub const VARIANCE_LIMIT_DEPTH: usize = 200;
pub const VARIANCE_LIMIT_TOLERANCE: f64 = 1e-6;
/// Required pass fraction for the Monte Carlo statements.
pub const MC_PASS_FRACTION: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Statement {
    MeanGap,
    VarianceBounds,
    DegreeConcentration,
    NeighborhoodBound,
    VarianceLimit,
    SymMonotone,
    ReluNoGain,
}

impl Statement {
    pub const ALL: [Statement; 7] = [
        Statement::MeanGap,
        Statement::VarianceBounds,
        Statement::DegreeConcentration,
        Statement::NeighborhoodBound,
        Statement::VarianceLimit,
        Statement::SymMonotone,
        Statement::ReluNoGain,
    ];
}

/// Suite of random connected graphs for the symmetric-operator check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomGraphSuite {
    pub max_nodes: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for RandomGraphSuite {
    fn default() -> Self {
        Self {
            max_nodes: 50,
            max_depth: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum VerifyTarget<'a> {
    Csbm(&'a CsbmParams),
    Graph { graph: &'a Graph, sigma2: f64, max_depth: usize },
    RandomGraphs(RandomGraphSuite),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub statement: Statement,
    pub trials: usize,
    pub pass_fraction: f64,
    pub worst_deviation: f64,
    /// Smallest constant making the bound hold across trials, where applicable.
    pub implied_constant: Option<f64>,
    pub passed: bool,
    /// The value `pass_fraction` (or the implied constant) is compared against.
    pub threshold: f64,
    pub extra: BTreeMap<String, f64>,
}

impl VerificationReport {
    fn new(statement: Statement, trials: usize) -> Self {
        Self {
            statement,
            trials,
            pass_fraction: 0.0,
            worst_deviation: 0.0,
            implied_constant: None,
            passed: false,
            threshold: MC_PASS_FRACTION,
            extra: BTreeMap::new(),
        }
    }
}

fn mismatch(statement: Statement, want: &str) -> Error {
    Error::Usage(format!("{statement:?} needs {want}"))
}

pub fn verify(statement: Statement, target: VerifyTarget<'_>, trials: usize, cfg: &ConcentrationConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    match (statement, target) {
        (Statement::MeanGap, VerifyTarget::Csbm(p)) => mean_gap(p, trials, cfg),
        (Statement::VarianceBounds, VerifyTarget::Csbm(p)) => variance_bounds(p, trials, cfg),
        (Statement::DegreeConcentration, VerifyTarget::Csbm(p)) => degree_concentration(p, trials),
        (Statement::NeighborhoodBound, VerifyTarget::Csbm(p)) => neighborhood(p, trials, cfg),
        (Statement::ReluNoGain, VerifyTarget::Csbm(p)) => relu_no_gain(p, trials, cfg),
        (Statement::VarianceLimit, VerifyTarget::Graph { graph, sigma2, .. }) => variance_limit(graph, sigma2),
        (Statement::SymMonotone, VerifyTarget::Graph { graph, max_depth, .. }) => {
            sym_monotone(std::slice::from_ref(graph), max_depth)
        }
        (Statement::SymMonotone, VerifyTarget::RandomGraphs(suite)) => {
            sym_monotone(&random_connected_family(trials, suite.max_nodes, suite.seed), suite.max_depth)
        }
        (Statement::VarianceLimit, _) => Err(mismatch(statement, "a graph")),
        (Statement::SymMonotone, _) => Err(mismatch(statement, "a graph or a random-graph suite")),
        _ => Err(mismatch(statement, "CSBM parameters")),
    }
}

fn mean_gap(p: &CsbmParams, trials: usize, cfg: &ConcentrationConfig) -> Result<VerificationReport> {
    let k_max = cfg.horizon_k;
    let mc = monte_carlo_moments(p, OperatorSpec::RANDOM_WALK, k_max, trials.max(2))?;
    let scale = (p.n_nodes as f64 * (p.p_intra + p.q_inter)).sqrt();
    let radius = theory::mean_gap_error(p, cfg);
    let mut worst: f64 = 0.0;
    let mut inside = 0usize;
    for gaps in &mc.per_trial_gap {
        for (k, &gap) in gaps.iter().enumerate().take(k_max + 1).skip(1) {
            let dev = (gap - theory::mean_gap(p, k)).abs();
            worst = worst.max(dev);
            inside += usize::from(dev <= radius);
        }
    }
    let mut r = VerificationReport::new(Statement::MeanGap, mc.per_trial_gap.len());
    r.pass_fraction = inside as f64 / (mc.per_trial_gap.len() * k_max) as f64;
    r.worst_deviation = worst;
    r.implied_constant = Some(worst * scale);
    r.threshold = cfg.constant_c;
    r.passed = worst * scale <= cfg.constant_c;
    let mut ratios = Vec::new();
    for k in 1..=k_max {
        let ratio = mc.rows[k].gap / mc.rows[k - 1].gap;
        r.extra.insert(format!("contraction_ratio_{k}"), ratio);
        r.extra.insert(format!("mean_gap_{k}"), mc.rows[k].gap);
        r.extra.insert(format!("mean_gap_stderr_{k}"), mc.rows[k].gap_stderr);
        ratios.push(ratio);
    }
    r.extra.insert("contraction_ratio_min".into(), ratios.iter().copied().fold(f64::INFINITY, f64::min));
    r.extra.insert("contraction_ratio_max".into(), ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    Ok(r)
}

fn variance_bounds(p: &CsbmParams, trials: usize, cfg: &ConcentrationConfig) -> Result<VerificationReport> {
    let k_max = cfg.horizon_k;
    let mc = monte_carlo_moments(p, OperatorSpec::RANDOM_WALK, k_max, trials.max(2))?;
    let bands: Vec<(f64, f64)> = (0..=k_max).map(|k| theory::variance_bounds(p, k)).collect();
    let count = |series: &Vec<Vec<f64>>| -> (usize, f64) {
        let mut inside = 0;
        let mut worst: f64 = 0.0;
        for t in series {
            for k in 1..=k_max {
                let (lo, hi) = bands[k];
                let v = t[k];
                inside += usize::from(lo <= v && v <= hi);
                worst = worst.max(lo - v).max(v - hi);
            }
        }
        (inside, worst)
    };
    let pairs = (mc.per_trial_variance.len() * k_max) as f64;
    let (inside, worst) = count(&mc.per_trial_variance);
    let (model_inside, _) = count(&mc.per_trial_model_variance);
    let mut r = VerificationReport::new(Statement::VarianceBounds, mc.per_trial_variance.len());
    r.pass_fraction = inside as f64 / pairs;
    r.worst_deviation = worst;
    r.passed = r.pass_fraction >= MC_PASS_FRACTION;
    r.extra.insert("model_variance_pass_fraction".into(), model_inside as f64 / pairs);
    r.extra.insert(
        "empty_band_depths".into(),
        (1..=k_max).filter(|&k| bands[k].0 > bands[k].1).count() as f64,
    );
    for (k, (row, band)) in mc.rows.iter().zip(&bands).enumerate().skip(1) {
        r.extra.insert(format!("variance_{k}"), row.variance);
        r.extra.insert(format!("model_variance_{k}"), row.model_variance);
        r.extra.insert(format!("lower_{k}"), band.0);
        r.extra.insert(format!("upper_{k}"), band.1);
    }
    Ok(r)
}

fn degree_concentration(p: &CsbmParams, trials: usize) -> Result<VerificationReport> {
    p.validate()?;
    let expected = p.n_nodes as f64 * (p.p_intra + p.q_inter) / 2.0;
    let per: Vec<(usize, f64, f64)> = par::map_indexed(trials, |t| {
        let g = sample_graph(p, t as u64);
        let mut inside = 0;
        let mut worst: f64 = 0.0;
        for &d in g.degrees() {
            let d = d as f64;
            inside += usize::from(d >= expected / 2.0 && d <= 1.5 * expected);
            worst = worst.max((d - expected).abs() / expected);
        }
        let mean = g.degrees().iter().sum::<usize>() as f64 / g.n_nodes() as f64;
        (inside, worst, mean)
    });
    let mut r = VerificationReport::new(Statement::DegreeConcentration, trials);
    r.pass_fraction = per.iter().map(|x| x.0).sum::<usize>() as f64 / (trials * p.n_nodes) as f64;
    r.worst_deviation = per.iter().map(|x| x.1).fold(0.0, f64::max);
    r.passed = r.pass_fraction >= MC_PASS_FRACTION;
    r.extra.insert("expected_degree".into(), expected);
    r.extra.insert("mean_degree".into(), mean_stderr(&per.iter().map(|x| x.2).collect::<Vec<_>>()).0);
    Ok(r)
}

fn neighborhood(p: &CsbmParams, trials: usize, cfg: &ConcentrationConfig) -> Result<VerificationReport> {
    p.validate()?;
    // Depths where the bound is below N; beyond that it holds trivially.
    let depths: Vec<usize> = (1..=cfg.horizon_k)
        .filter(|&n| theory::neighborhood_bound(p, n) < p.n_nodes as f64)
        .collect();
    let k_max = depths.last().copied().unwrap_or(0);
    let per: Vec<f64> = par::map_indexed(trials, |t| {
        let g = sample_graph(p, t as u64);
        let prof = neighborhood_profile(&g, k_max, p.seed ^ t as u64);
        depths
            .iter()
            .map(|&n| prof.max_ball[n] as f64 / theory::neighborhood_bound(p, n))
            .fold(0.0, f64::max)
    });
    let worst = per.iter().copied().fold(0.0, f64::max);
    let mut r = VerificationReport::new(Statement::NeighborhoodBound, trials);
    r.pass_fraction = per.iter().filter(|&&x| x <= 1.0).count() as f64 / trials as f64;
    r.worst_deviation = worst;
    r.implied_constant = Some(10.0 * worst);
    r.passed = r.pass_fraction >= MC_PASS_FRACTION;
    r.extra.insert("checked_depths".into(), depths.len() as f64);
    r.extra.insert("bound_1".into(), theory::neighborhood_bound(p, 1));
    Ok(r)
}

fn variance_limit(graph: &Graph, sigma2: f64) -> Result<VerificationReport> {
    let limit = theory::variance_limit(graph)? * sigma2;
    let curve = exact_variance_curve(graph, OperatorSpec::RANDOM_WALK, VARIANCE_LIMIT_DEPTH, sigma2, DEFAULT_EXACT_CAP)?;
    let last = &curve[VARIANCE_LIMIT_DEPTH].per_node;
    let devs: Vec<f64> = last.iter().map(|v| (v - limit).abs()).collect();
    let mut r = VerificationReport::new(Statement::VarianceLimit, 1);
    r.worst_deviation = devs.iter().copied().fold(0.0, f64::max);
    r.pass_fraction = devs.iter().filter(|&&d| d < VARIANCE_LIMIT_TOLERANCE).count() as f64 / devs.len() as f64;
    r.threshold = VARIANCE_LIMIT_TOLERANCE;
    r.passed = r.worst_deviation < VARIANCE_LIMIT_TOLERANCE;
    r.extra.insert("limit".into(), limit);
    r.extra.insert("depth".into(), VARIANCE_LIMIT_DEPTH as f64);
    Ok(r)
}

fn sym_monotone(graphs: &[Graph], max_depth: usize) -> Result<VerificationReport> {
    let mut pairs = 0usize;
    let mut increases = 0usize;
    let mut worst: f64 = 0.0;
    for (i, g) in graphs.iter().enumerate() {
        let found = variance_increases(g, i, OperatorSpec::SYMMETRIC, max_depth)?;
        pairs += g.n_nodes() * max_depth;
        increases += found.len();
        worst = found.iter().map(|f| f.after - f.before).fold(worst, f64::max);
    }
    let mut r = VerificationReport::new(Statement::SymMonotone, graphs.len());
    r.pass_fraction = 1.0 - increases as f64 / pairs.max(1) as f64;
    r.worst_deviation = worst;
    r.threshold = 1.0;
    r.passed = increases == 0;
    r.extra.insert("pairs".into(), pairs as f64);
    r.extra.insert("increases".into(), increases as f64);
    Ok(r)
}

fn relu_no_gain(p: &CsbmParams, trials: usize, cfg: &ConcentrationConfig) -> Result<VerificationReport> {
    let depth = cfg.horizon_k;
    let diffs: Vec<f64> = par::map_indexed(trials, |t| -> Result<f64> {
        let (g, f) = sample_instance(p, t as u64)?;
        let split = random_split(g.n_nodes(), SplitFractions::default(), p.seed, t as u64)?;
        let lin = propagate(&g, &f.matrix, OperatorSpec::RANDOM_WALK, depth)?.matrix;
        let relu = lin.mapv(|v| v.max(0.0));
        let (_, acc_lin) = threshold_accuracy(&lin, g.labels(), &split)?;
        let (_, acc_relu) = threshold_accuracy(&relu, g.labels(), &split)?;
        Ok((1.0 - acc_relu) - (1.0 - acc_lin))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let (mean, se) = mean_stderr(&diffs);
    let equality = p.mu1 >= -p.mu2;
    let mut r = VerificationReport::new(Statement::ReluNoGain, trials);
    r.pass_fraction = diffs.iter().filter(|&&d| d >= 0.0).count() as f64 / trials as f64;
    r.worst_deviation = diffs.iter().copied().fold(0.0, f64::min);
    r.threshold = -2.0;
    let no_gain = mean >= -2.0 * se;
    let no_change = mean.abs() <= 2.0 * se;
    r.passed = no_gain && (!equality || no_change);
    r.extra.insert("mean_difference".into(), mean);
    r.extra.insert("stderr".into(), se);
    r.extra.insert("equality_regime".into(), f64::from(u8::from(equality)));
    r.extra.insert("depth".into(), depth as f64);
    Ok(r)
}
