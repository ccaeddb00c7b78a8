//! Subcommand implementations. Each returns the document bytes to emit.

use std::path::Path;

use anyhow::{anyhow, bail, Result};
use ndarray::Array2;
use oversmooth::empirics::{
    class_stats, layerwise_sweep, verify, RandomGraphSuite, Statement, SweepConfig, SweepInput, VerifyTarget,
};
use oversmooth::propagation::Propagator;
use oversmooth::theory::bound_curve;
use oversmooth::{load_graph, Graph, OperatorSpec};
use serde::Serialize;

use crate::config::{ExperimentConfig, Format, IngestPaths, Model};
use crate::output::{config_hash, csv_document, fmt_f64, header_comment, json_document};

/// Usage-class failure (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn header(command: &str, cfg: &ExperimentConfig) -> String {
    header_comment(command, &config_hash(&cfg.canonical_json()), cfg.effective_seed())
}

fn table<T: Serialize>(
    command: &str,
    cfg: &ExperimentConfig,
    columns: &[&str],
    rows: Vec<Vec<String>>,
    json_rows: &T,
) -> Result<Vec<u8>> {
    match cfg.output.format {
        Format::Csv => {
            let columns: Vec<String> = columns.iter().map(|s| s.to_string()).collect();
            csv_document(&header(command, cfg), &columns, &rows)
        }
        Format::Json => json_document(&serde_json::json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config_sha256": config_hash(&cfg.canonical_json()),
            "seed": cfg.effective_seed(),
            "rows": json_rows,
        })),
    }
}

fn load_ingested(paths: &IngestPaths) -> Result<(Graph, Option<Array2<f64>>)> {
    let (graph, features, _) = load_graph(&paths.edges, &paths.labels, paths.features.as_deref())?;
    Ok((graph, features.map(|f| f.matrix)))
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let sweep_cfg = SweepConfig {
        ops: cfg.operators.clone(),
        n_max: cfg.n_max,
        trials: cfg.trials,
        split: cfg.split_fractions,
        rule: cfg.rule,
    };
    let rows = match &cfg.model {
        Model::Csbm(p) => layerwise_sweep(SweepInput::Csbm(p), &sweep_cfg)?,
        Model::Ingest(paths) => {
            let (graph, x) = load_ingested(paths)?;
            let x = x.ok_or_else(|| usage("sweep on an ingested graph needs a features file"))?;
            let input = SweepInput::Fixed {
                graph: &graph,
                features: &x,
                seed: cfg.seed,
            };
            layerwise_sweep(input, &sweep_cfg)?
        }
    };
    let csv_rows = rows
        .iter()
        .map(|r| {
            vec![
                r.depth.to_string(),
                r.operator.label(),
                fmt_f64(r.train_acc),
                fmt_f64(r.test_acc),
                fmt_f64(r.train_acc_stderr),
                fmt_f64(r.test_acc_stderr),
                fmt_f64(r.mixing_metric),
                fmt_f64(r.denoising_metric),
                fmt_f64(r.empirical_z),
            ]
        })
        .collect();
    let columns = [
        "depth",
        "operator",
        "train_acc",
        "test_acc",
        "train_acc_stderr",
        "test_acc_stderr",
        "mixing_metric",
        "denoising_metric",
        "empirical_z",
    ];
    table("sweep", cfg, &columns, csv_rows, &rows)
}

#[derive(Serialize)]
struct TheoryRow {
    operator: String,
    #[serde(flatten)]
    bounds: oversmooth::TheoryBounds,
}

pub fn theory(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let params = cfg.csbm().ok_or_else(|| usage("theory needs a csbm model"))?;
    let mut rows = Vec::new();
    for op in &cfg.operators {
        if op.terminal_relu {
            return Err(usage(format!("no closed-form bounds for {}", op.label())));
        }
        let curve = bound_curve(params, &op.kind, cfg.n_max, cfg.log_base).map_err(|e| usage(e.to_string()))?;
        rows.extend(curve.into_iter().map(|bounds| TheoryRow {
            operator: op.label(),
            bounds,
        }));
    }
    let csv_rows = rows
        .iter()
        .map(|r| {
            let b = &r.bounds;
            vec![
                b.depth.to_string(),
                r.operator.clone(),
                fmt_f64(b.mean_gap),
                fmt_f64(b.var_lower),
                fmt_f64(b.var_upper),
                fmt_f64(b.z_lower),
                fmt_f64(b.z_upper),
                fmt_f64(b.bayes_err_lower),
                fmt_f64(b.bayes_err_upper),
                b.consistent.to_string(),
            ]
        })
        .collect();
    let columns = [
        "depth",
        "operator",
        "mean_gap",
        "var_lower",
        "var_upper",
        "z_lower",
        "z_upper",
        "bayes_err_lower",
        "bayes_err_upper",
        "bounds_consistent",
    ];
    table("theory", cfg, &columns, csv_rows, &rows)
}

pub fn predict(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let params = cfg.csbm().ok_or_else(|| usage("predict-depth needs a csbm model"))?;
    let horizon = cfg.horizon.unwrap_or(cfg.n_max);
    let prediction = oversmooth::depth::predict_depth_in(params, horizon, cfg.log_base)?;
    json_document(&prediction)
}

/// The report bytes and whether the statement passed.
pub fn verify_cmd(statement: Statement, cfg: &ExperimentConfig) -> Result<(Vec<u8>, bool)> {
    let ingested;
    let target = match (&cfg.model, statement) {
        (Model::Csbm(_), Statement::SymMonotone) => VerifyTarget::RandomGraphs(RandomGraphSuite {
            seed: cfg.graph_suite.seed ^ cfg.effective_seed(),
            ..cfg.graph_suite
        }),
        (Model::Csbm(p), _) => VerifyTarget::Csbm(p),
        (Model::Ingest(paths), _) => {
            ingested = load_ingested(paths)?.0;
            VerifyTarget::Graph {
                graph: &ingested,
                sigma2: paths.sigma2,
                max_depth: cfg.graph_suite.max_depth,
            }
        }
    };
    let report = verify(statement, target, cfg.trials, &cfg.concentration)?;
    Ok((json_document(&report)?, report.passed))
}

pub fn ingest(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let Model::Ingest(paths) = &cfg.model else {
        bail!(usage("ingest needs an ingest model"));
    };
    let (graph, x) = load_ingested(paths)?;
    let x = x.ok_or_else(|| usage("ingest needs a features file"))?;
    let c = graph.n_classes();
    let mut columns: Vec<String> = ["depth", "operator", "mean_distance", "pooled_within_var"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in 1..=c {
        for j in i + 1..=c {
            columns.push(format!("dist_{i}_{j}"));
        }
    }
    columns.extend((1..=c).map(|k| format!("within_var_{k}")));
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for op in &cfg.operators {
        let mut prop = Propagator::new(&graph, &x, *op)?;
        for depth in 0..=cfg.n_max {
            if depth > 0 {
                prop.advance()?;
            }
            let s = class_stats(&prop.current().matrix, graph.labels(), depth)?;
            let mut row = vec![
                depth.to_string(),
                op.label(),
                fmt_f64(s.mean_distance()),
                fmt_f64(s.pooled_within_var),
            ];
            for i in 0..c {
                for j in i + 1..c {
                    row.push(fmt_f64(s.pairwise_mean_dists[[i, j]]));
                }
            }
            row.extend(s.class_within_var.iter().map(|&v| fmt_f64(v)));
            rows.push(row);
            json_rows.push(serde_json::json!({"operator": op.label(), "stats": s}));
        }
    }
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    table("ingest", cfg, &columns, rows, &json_rows)
}

/// Build a config for `ingest` from explicit file flags.
pub fn ingest_config(
    edges: &Path,
    labels: &Path,
    features: Option<&Path>,
    operators: Vec<OperatorSpec>,
    n_max: usize,
) -> ExperimentConfig {
    let text = serde_json::json!({
        "version": crate::config::SCHEMA_VERSION,
        "model": {"ingest": {"edges": edges, "labels": labels, "features": features}},
        "operators": operators,
        "n_max": n_max,
    })
    .to_string();
    ExperimentConfig::from_json(&text, Path::new("")).expect("generated config is valid")
}
