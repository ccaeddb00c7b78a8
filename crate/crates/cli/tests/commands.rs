use std::fs;
use std::path::{Path, PathBuf};

use oversmooth_cli::{run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run_to_file(args: &[&str], dir: &tempfile::TempDir, name: &str) -> (i32, String) {
    let out = dir.path().join(name);
    let mut full = vec!["oversmooth"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let code = run(full);
    (code, fs::read_to_string(&out).unwrap_or_default())
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn ingest_matches_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("pendant.json");
    let (code, text) = run_to_file(&["ingest", "--config", cfg.to_str().unwrap()], &dir, "o.csv");
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# oversmooth "));
    assert_eq!(
        lines[1],
        "depth,operator,mean_distance,pooled_within_var,dist_1_2,within_var_1,within_var_2"
    );
    // Features 1,2,3,4; one random-walk step gives 3, 2, 1.5, 1.
    assert_eq!(lines[2], "0,rw,2.0,0.5,2.0,0.5,0.5");
    assert_eq!(lines[3], "1,rw,1.25,0.3125,1.25,0.5,0.125");
    assert!(text.contains("\r\n"));
}

#[test]
fn ingest_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to_file(
        &[
            "ingest",
            "--edges",
            fixture("pendant_edges.txt").to_str().unwrap(),
            "--labels",
            fixture("pendant_labels.csv").to_str().unwrap(),
            "--features",
            fixture("pendant_features.csv").to_str().unwrap(),
        ],
        &dir,
        "o.csv",
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(text.lines().filter(|l| l.contains(",rw,")).count(), 11);
}

#[test]
fn ingest_missing_node_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let labels = write(&dir, "l.csv", "node,label\n0,1\n1,1\n2,2\n3,2\n");
    let feats = write(&dir, "f.csv", "node,f0\n0,1\n1,2\n3,4\n");
    let code = run([
        "oversmooth",
        "ingest",
        "--edges",
        fixture("pendant_edges.txt").to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--features",
        feats.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn bad_config_and_usage_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(&dir, "u.json", r#"{"version": 1, "model": {"csbm": {}}, "bogus": 1}"#);
    assert_eq!(run(["oversmooth", "sweep", "--config", unknown.to_str().unwrap()]), EXIT_USAGE);
    let version = write(&dir, "v.json", r#"{"version": 99, "model": {"csbm": {}}}"#);
    assert_eq!(run(["oversmooth", "theory", "--config", version.to_str().unwrap()]), EXIT_USAGE);
    assert_eq!(run(["oversmooth", "sweep"]), EXIT_USAGE);
    assert_eq!(run(["oversmooth", "frobnicate"]), EXIT_USAGE);
    assert_eq!(run(["oversmooth", "verify", "nonsense"]), EXIT_USAGE);
    let missing = dir.path().join("absent.json");
    assert_eq!(run(["oversmooth", "sweep", "--config", missing.to_str().unwrap()]), EXIT_USAGE);
}

#[test]
fn theory_rejects_the_symmetric_operator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir,
        "s.json",
        r#"{"version": 1, "model": {"csbm": {"n_nodes": 100, "p_intra": 0.1, "q_inter": 0.05,
            "mu1": 0.0, "mu2": 1.0, "sigma2": 1.0}}, "operators": [{"kind": "symmetric"}]}"#,
    );
    assert_eq!(run(["oversmooth", "theory", "--config", cfg.to_str().unwrap()]), EXIT_USAGE);
}

#[test]
fn theory_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("csbm_small.json");
    let (code, text) = run_to_file(&["theory", "--config", cfg.to_str().unwrap()], &dir, "t.csv");
    assert_eq!(code, EXIT_OK);
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..3], ["depth", "operator", "mean_gap"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    // Two operators, depths 0..=6.
    assert_eq!(rows.len(), 14);
    for r in &rows {
        let lo: f64 = r[3].parse().unwrap();
        let hi: f64 = r[4].parse().unwrap();
        assert!(lo > 0.0 && hi.is_finite());
    }
}

#[test]
fn sweep_is_byte_identical_across_reruns_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("csbm_small.json");
    let cfg = cfg.to_str().unwrap();
    let (c1, a) = run_to_file(&["sweep", "--config", cfg, "--threads", "1"], &dir, "a.csv");
    let (c2, b) = run_to_file(&["sweep", "--config", cfg, "--threads", "4"], &dir, "b.csv");
    let (c3, c) = run_to_file(&["sweep", "--config", cfg], &dir, "c.csv");
    assert_eq!((c1, c2, c3), (EXIT_OK, EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
    assert_eq!(a, c);
    let (_, other) = run_to_file(&["sweep", "--config", cfg, "--seed", "8"], &dir, "d.csv");
    assert_ne!(a, other);
    assert!(other.lines().next().unwrap().ends_with("seed=8"));
}

#[test]
fn predict_depth_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("reference.json");
    let (code, text) = run_to_file(&["predict-depth", "--config", cfg.to_str().unwrap()], &dir, "p.json");
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["scenario"], "LowerCrossToo");
    assert_eq!(v["horizon"], 30);
    assert_eq!(v["z_upper"].as_array().unwrap().len(), 31);
}

#[test]
fn verify_reports_and_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("csbm_small.json");
    let (code, text) = run_to_file(
        &["verify", "sym-monotone", "--config", cfg.to_str().unwrap()],
        &dir,
        "v.json",
    );
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["passed"], true);

    // A statement that does not apply to an ingested graph.
    let ingest = fixture("pendant.json");
    let code = run(["oversmooth", "verify", "mean-gap", "--config", ingest.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);

    // The pendant graph has a triangle and is connected, so the limit holds.
    let (code, _) = run_to_file(
        &["verify", "variance-limit", "--config", ingest.to_str().unwrap()],
        &dir,
        "l.json",
    );
    assert_eq!(code, EXIT_OK);

    // A bipartite graph has no stationary limit.
    let edges = write(&dir, "e.txt", "0 1\n1 2\n2 3\n");
    let labels = write(&dir, "l.csv", "node,label\n0,1\n1,1\n2,2\n3,2\n");
    let path_cfg = write(
        &dir,
        "p.json",
        &format!(
            r#"{{"version": 1, "model": {{"ingest": {{"edges": {:?}, "labels": {:?}}}}}}}"#,
            edges, labels
        ),
    );
    let code = run(["oversmooth", "verify", "variance-limit", "--config", path_cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_FAILURE);
}

#[test]
fn json_output_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir,
        "j.json",
        r#"{"version": 1, "model": {"csbm": {"n_nodes": 100, "p_intra": 0.1, "q_inter": 0.05,
            "mu1": 0.0, "mu2": 1.0, "sigma2": 1.0}}, "n_max": 3, "output": {"format": "json"}}"#,
    );
    let (code, text) = run_to_file(&["theory", "--config", cfg.to_str().unwrap()], &dir, "o.json");
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "theory");
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}
