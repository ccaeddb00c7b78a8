//! Layer-by-layer accuracy and class-statistic sweeps.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::classify::{random_split, threshold_accuracy_with, DecisionRule, SplitFractions};
use super::stats::{class_stats, mean_stderr};
use crate::csbm::{sample_instance, CsbmParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;
use crate::propagation::{OperatorKind, OperatorSpec, Propagator};

/// Trial-averaged measurements at one (operator, depth).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub depth: usize,
    pub operator: OperatorSpec,
    pub train_acc: f64,
    pub test_acc: f64,
    pub train_acc_stderr: f64,
    pub test_acc_stderr: f64,
    /// Distance between class means.
    pub mixing_metric: f64,
    /// Pooled within-class variance.
    pub denoising_metric: f64,
    pub empirical_z: f64,
}

/// Which threshold rule the sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleChoice {
    /// Known-model midpoint for CSBM inputs under midpoint-preserving
    /// operators (random walk, PPNP, APPNP, no ReLU); fitted otherwise.
    #[default]
    Auto,
    Fitted,
    Population,
}

#[derive(Debug, Clone, Copy)]
pub enum SweepInput<'a> {
    /// Fresh graph and features per trial.
    Csbm(&'a CsbmParams),
    /// One fixed graph; only the split varies across trials.
    Fixed {
        graph: &'a Graph,
        features: &'a Array2<f64>,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub ops: Vec<OperatorSpec>,
    pub n_max: usize,
    pub trials: usize,
    pub split: SplitFractions,
    pub rule: RuleChoice,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ops: vec![OperatorSpec::RANDOM_WALK],
            n_max: 20,
            trials: 5,
            split: SplitFractions::default(),
            rule: RuleChoice::Auto,
        }
    }
}

fn rule_for(choice: RuleChoice, input: &SweepInput<'_>, op: &OperatorSpec) -> Result<DecisionRule> {
    let model = match input {
        SweepInput::Csbm(p) => Some(**p),
        SweepInput::Fixed { .. } => None,
    };
    let preserving = !op.terminal_relu && !matches!(op.kind, OperatorKind::Symmetric);
    match (choice, model) {
        (RuleChoice::Fitted, _) => Ok(DecisionRule::Fitted),
        (RuleChoice::Auto, Some(p)) if preserving => Ok(DecisionRule::Population {
            midpoint: 0.5 * (p.mu1 + p.mu2),
        }),
        (RuleChoice::Auto, _) => Ok(DecisionRule::Fitted),
        (RuleChoice::Population, Some(p)) => Ok(DecisionRule::Population {
            midpoint: 0.5 * (p.mu1 + p.mu2),
        }),
        (RuleChoice::Population, None) => Err(Error::Usage(
            "the population rule needs known class means; use the fitted rule for ingested graphs".into(),
        )),
    }
}

/// Per-trial values, indexed `[op][depth]`.
#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    train: f64,
    test: f64,
    mixing: f64,
    denoising: f64,
    z: f64,
}

fn run_trial(input: &SweepInput<'_>, cfg: &SweepConfig, trial: u64) -> Result<Vec<Vec<Cell>>> {
    let owned;
    let (graph, x, seed) = match input {
        SweepInput::Csbm(p) => {
            let (g, f) = sample_instance(p, trial)?;
            owned = (g, f.matrix);
            (&owned.0, &owned.1, p.seed)
        }
        SweepInput::Fixed { graph, features, seed } => (*graph, *features, *seed),
    };
    let labels = graph.labels();
    let split = random_split(graph.n_nodes(), cfg.split, seed, trial)?;
    let two_class = graph.n_classes() == 2;
    let mut out = Vec::with_capacity(cfg.ops.len());
    for op in &cfg.ops {
        let rule = rule_for(cfg.rule, input, op)?;
        let mut prop = Propagator::new(graph, x, *op)?;
        let mut cells = Vec::with_capacity(cfg.n_max + 1);
        for depth in 0..=cfg.n_max {
            if depth > 0 {
                prop.advance()?;
            }
            let h = prop.current().matrix;
            let stats = class_stats(&h, labels, depth)?;
            let (train, test) = if two_class {
                threshold_accuracy_with(&h, labels, &split, rule)?
            } else {
                (f64::NAN, f64::NAN)
            };
            cells.push(Cell {
                train,
                test,
                mixing: stats.mean_distance(),
                denoising: stats.pooled_within_var,
                z: stats.empirical_z(),
            });
        }
        out.push(cells);
    }
    Ok(out)
}

/// Sweep every operator over depths `0..=n_max`, averaging over trials.
/// Rows are ordered by operator, then depth. Accuracies are NaN for graphs
/// with more than two classes.
pub fn layerwise_sweep(input: SweepInput<'_>, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.split.validate()?;
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if let SweepInput::Fixed { graph, features, .. } = input {
        if features.nrows() != graph.n_nodes() {
            return Err(Error::InvalidParameter("feature rows differ from node count".into()));
        }
    }
    let per_trial: Vec<Vec<Vec<Cell>>> = par::map_indexed(cfg.trials, |t| run_trial(&input, cfg, t as u64))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (o, op) in cfg.ops.iter().enumerate() {
        for depth in 0..=cfg.n_max {
            let pick = |f: fn(&Cell) -> f64| -> Vec<f64> { per_trial.iter().map(|t| f(&t[o][depth])).collect() };
            let (train_acc, train_acc_stderr) = mean_stderr(&pick(|c| c.train));
            let (test_acc, test_acc_stderr) = mean_stderr(&pick(|c| c.test));
            rows.push(SweepRow {
                depth,
                operator: *op,
                train_acc,
                test_acc,
                train_acc_stderr,
                test_acc_stderr,
                mixing_metric: mean_stderr(&pick(|c| c.mixing)).0,
                denoising_metric: mean_stderr(&pick(|c| c.denoising)).0,
                empirical_z: mean_stderr(&pick(|c| c.z)).0,
            });
        }
    }
    Ok(rows)
}
