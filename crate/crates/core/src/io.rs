//! Reading external graphs.
//!
//! * edge list: one `u v` pair of 0-based node indices per line, `#` comments;
//! * labels: CSV with header `node,label`, one row per node;
//! * features: CSV with header `node,f0,f1,...`, one row per node.
//!
//! The node count is taken from the labels file.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{Features, Graph, LoadReport};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file))
}

fn csv_parse_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    parse_err(path, line, e.to_string())
}

/// Rows of a node-indexed CSV, checked to cover `0..n` exactly once.
fn node_rows(path: &Path, expected_header: &[&str]) -> Result<Vec<(usize, usize, csv::StringRecord)>> {
    let mut rdr = csv_reader(path)?;
    let header = rdr.headers().map_err(|e| csv_parse_err(path, e))?.clone();
    let ok = header.len() >= expected_header.len()
        && expected_header.iter().zip(header.iter()).all(|(a, b)| *a == b);
    if !ok {
        return Err(parse_err(
            path,
            1,
            format!("expected header starting with {:?}, got {:?}", expected_header.join(","), header),
        ));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_parse_err(path, e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let node: usize = record[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad node index {:?}", &record[0])))?;
        rows.push((line, node, record));
    }
    Ok(rows)
}

/// Labels indexed by node, remapped to `1..=C` in ascending order of the
/// original values. Returns the labels and the original values.
pub fn load_labels(path: &Path) -> Result<(Vec<usize>, Vec<i64>)> {
    let rows = node_rows(path, &["node", "label"])?;
    let n = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
    let mut raw: Vec<Option<i64>> = vec![None; n];
    for (line, node, rec) in &rows {
        if rec.len() != 2 {
            return Err(parse_err(path, *line, "expected 2 fields"));
        }
        let label: i64 = rec[1]
            .parse()
            .map_err(|_| parse_err(path, *line, format!("bad label {:?}", &rec[1])))?;
        if raw[*node].replace(label).is_some() {
            return Err(parse_err(path, *line, format!("duplicate row for node {node}")));
        }
    }
    let mut values = Vec::with_capacity(n);
    for (node, v) in raw.into_iter().enumerate() {
        values.push(v.ok_or_else(|| Error::MissingNode {
            path: path.to_path_buf(),
            node,
        })?);
    }
    let originals: Vec<i64> = values.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let labels = values
        .iter()
        .map(|v| originals.binary_search(v).expect("value is present") + 1)
        .collect();
    Ok((labels, originals))
}

pub fn load_features(path: &Path, n_nodes: usize) -> Result<Features> {
    let rows = node_rows(path, &["node", "f0"])?;
    let d = rows.first().map(|r| r.2.len() - 1).unwrap_or(0);
    let mut matrix = Array2::zeros((n_nodes, d.max(1)));
    let mut seen = vec![false; n_nodes];
    for (line, node, rec) in &rows {
        if *node >= n_nodes {
            return Err(Error::NodeOutOfRange {
                path: path.to_path_buf(),
                line: *line,
                node: *node,
                n_nodes,
            });
        }
        if rec.len() != d + 1 {
            return Err(parse_err(path, *line, format!("expected {} fields, got {}", d + 1, rec.len())));
        }
        for k in 0..d {
            matrix[[*node, k]] = rec[k + 1]
                .parse()
                .map_err(|_| parse_err(path, *line, format!("bad feature value {:?}", &rec[k + 1])))?;
        }
        seen[*node] = true;
    }
    if let Some(node) = seen.iter().position(|s| !s) {
        return Err(Error::MissingNode {
            path: path.to_path_buf(),
            node,
        });
    }
    Ok(Features::new(matrix))
}

/// Canonical edges, self-loops dropped, duplicates collapsed.
pub type EdgeList = (Vec<(usize, usize)>, usize, usize);

/// Parse an edge list for a graph with `n_nodes` nodes. Returns the
/// canonical `(min, max)` pairs plus self-loop and duplicate counts.
pub fn load_edges(path: &Path, n_nodes: usize) -> Result<EdgeList> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let (mut loops, mut dups) = (0, 0);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(path, line, format!("expected two node indices, got {trimmed:?}")));
        }
        let mut ends = [0usize; 2];
        for (slot, f) in ends.iter_mut().zip(&fields) {
            *slot = f
                .parse()
                .map_err(|_| parse_err(path, line, format!("bad node index {f:?}")))?;
            if *slot >= n_nodes {
                return Err(Error::NodeOutOfRange {
                    path: path.to_path_buf(),
                    line,
                    node: *slot,
                    n_nodes,
                });
            }
        }
        let (u, v) = (ends[0].min(ends[1]), ends[0].max(ends[1]));
        if u == v {
            loops += 1;
        } else if !seen.insert((u, v)) {
            dups += 1;
        } else {
            edges.push((u, v));
        }
    }
    Ok((edges, loops, dups))
}

/// Load a labelled graph and optional features.
pub fn load_graph(
    edge_list_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    features_path: Option<&Path>,
) -> Result<(Graph, Option<Features>, LoadReport)> {
    let labels_path: PathBuf = labels_path.as_ref().to_path_buf();
    let (labels, original_labels) = load_labels(&labels_path)?;
    let n = labels.len();
    let (edges, self_loops_dropped, duplicate_edges_collapsed) = load_edges(edge_list_path.as_ref(), n)?;
    let graph = Graph::from_edges(n, &edges, labels)?;
    let features = features_path.map(|p| load_features(p, n)).transpose()?;
    let isolated_nodes = graph.isolated_nodes();
    let report = LoadReport {
        has_isolated: !isolated_nodes.is_empty(),
        isolated_nodes,
        self_loops_dropped,
        duplicate_edges_collapsed,
        original_labels,
    };
    Ok((graph, features, report))
}
