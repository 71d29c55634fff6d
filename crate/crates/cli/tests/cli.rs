use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dproute_core::report::{AGGREGATE_HEADER, BOUNDS_HEADER, RECORDS_HEADER};
use dproute_core::{path_deviation_prob, WeightedGraph};
use serde_json::{json, Value};

fn run(args: &[&str], config: &Value, dir: &Path) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config.to_string()).unwrap();
    Command::new(env!("CARGO_BIN_EXE_dproute"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap()
}

fn out_dir(tmp: &tempfile::TempDir, name: &str) -> PathBuf {
    tmp.path().join(name)
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn generate_small_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "g");
    let cfg = json!({"graph": {"class": "grid", "n": 2}, "master_seed": 1, "output_dir": dir});
    let out = run(&["generate"], &cfg, tmp.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = read(dir.join("graph.txt"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n 4");
    assert_eq!(lines.iter().filter(|l| l.starts_with("e ")).count(), 4);
    let meta: Value = serde_json::from_str(&read(dir.join("graph.txt.meta.json"))).unwrap();
    assert_eq!(meta["command"], "generate");
    assert!(meta["graph"]["weight_seed"].is_u64());

    // same config, same bytes
    let again = out_dir(&tmp, "g2");
    let cfg2 = json!({"graph": {"class": "grid", "n": 2}, "master_seed": 1, "output_dir": again});
    assert!(run(&["generate"], &cfg2, tmp.path()).status.success());
    assert_eq!(text, read(again.join("graph.txt")));
}

#[test]
fn invalid_wheel_ratio_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({"graph": {"class": "wheel", "n": 10, "r": 0.5}, "master_seed": 1, "output_dir": out_dir(&tmp, "w")});
    let out = run(&["generate"], &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`r`"), "{err}");
    assert!(!out_dir(&tmp, "w").exists());
}

#[test]
fn missing_seed_and_double_privacy_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let no_seed = json!({"graph": {"class": "grid", "n": 3}, "privacy": {"sigma": 0.1}, "output_dir": out_dir(&tmp, "a")});
    let out = run(&["simulate"], &no_seed, tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("master_seed"));

    let both = json!({
        "graph": {"class": "grid", "n": 3}, "privacy": {"sigma": 0.1, "noise_pct": 5},
        "master_seed": 3, "output_dir": out_dir(&tmp, "b")
    });
    let out = run(&["simulate"], &both, tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("privacy"));
}

#[test]
fn zero_noise_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "s");
    let cfg = json!({
        "graph": {"class": "scale_free", "n": 40, "gamma": 1.5},
        "privacy": {"sigma": 0.0}, "trials": 3, "master_seed": 8, "output_dir": dir
    });
    let out = run(&["simulate"], &cfg, tmp.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let agg = read(dir.join("aggregate.csv"));
    let mut lines = agg.lines();
    assert_eq!(lines.next(), Some(AGGREGATE_HEADER));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let expected = if f[1] == "0" && f[2] == "0" { "1" } else { "0" };
        assert_eq!(f[3], expected, "{line}");
    }
    assert!(read(dir.join("records.csv")).starts_with(RECORDS_HEADER));
    for f in ["records.csv", "aggregate.csv", "pairs.csv", "trend.json"] {
        let meta: Value = serde_json::from_str(&read(dir.join(format!("{f}.meta.json")))).unwrap();
        assert_eq!(meta["sigma"], 0.0);
        assert_eq!(meta["config"]["master_seed"], 8);
    }
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "graph": {"class": "grid", "n": 3}, "privacy": {"noise_pct": 20},
        "trials": 50, "master_seed": 1, "output_dir": out_dir(&tmp, "ignored")
    });
    let dir = out_dir(&tmp, "flags");
    let cfg_path = tmp.path().join("c.json");
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dproute"))
        .args([
            "simulate", "--trials", "2", "--seed", "5", "--sigma", "0.25", "--config",
        ])
        .arg(&cfg_path)
        .arg("--output-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!out_dir(&tmp, "ignored").exists());
    let meta: Value = serde_json::from_str(&read(dir.join("records.csv.meta.json"))).unwrap();
    assert_eq!(meta["sigma"], 0.25);
    assert_eq!(meta["config"]["trials"], 2);
    assert_eq!(meta["config"]["master_seed"], 5);
    let records = read(dir.join("records.csv"));
    assert_eq!(records.lines().count(), 1 + 2 * 36);
}

fn bounds_rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(BOUNDS_HEADER));
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn bounds_on_two_path_square() {
    // the 2x2 grid is a 4-cycle: corners 0 and 3 are joined by two disjoint paths
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "b");
    let betas: Vec<f64> = (1..=30).map(|i| i as f64 * 0.05).collect();
    let cfg = json!({
        "graph": {"class": "grid", "n": 2},
        "privacy": {"sigma": 0.2}, "master_seed": 12, "output_dir": dir,
        "bounds": {"source": 0, "target": 3, "betas": betas}
    });
    assert!(run(&["generate"], &cfg, tmp.path()).status.success());
    let out = run(&["bounds"], &cfg, tmp.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let g = WeightedGraph::from_text(&read(dir.join("graph.txt"))).unwrap();
    let via_1 = g.weight(0, 1).unwrap() + g.weight(1, 3).unwrap();
    let via_2 = g.weight(0, 2).unwrap() + g.weight(2, 3).unwrap();
    let alpha = (via_1 - via_2).abs();
    assert!(
        alpha > 0.05 && alpha < 1.5,
        "the beta grid should straddle the gap, got {alpha}"
    );
    let lemma = path_deviation_prob(alpha, 4, 0.2).unwrap();
    let rows = bounds_rows(&read(dir.join("bounds.csv")));
    assert_eq!(rows.len(), betas.len());
    for (row, beta) in rows.iter().zip(&betas) {
        let sum: f64 = row[1].parse().unwrap();
        let exact: f64 = row[3].parse().unwrap();
        assert_eq!(row[6], "2");
        if *beta <= alpha {
            assert!((sum - lemma).abs() < 1e-15, "beta {beta}: {sum} vs {lemma}");
            assert!((exact - lemma).abs() < 1e-6);
        } else {
            // beyond the only gap every beta-dependent column is zero
            assert_eq!(row[1], "0");
            assert_eq!(row[2], "0");
            assert_eq!(row[3], "0");
        }
    }
    let meta: Value = serde_json::from_str(&read(dir.join("bounds.csv.meta.json"))).unwrap();
    assert_eq!(meta["sigma"], 0.2);
}

#[test]
fn bounds_refuse_truncated_enumeration() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "graph": {"class": "grid", "n": 5},
        "privacy": {"noise_pct": 20}, "master_seed": 2, "output_dir": out_dir(&tmp, "t"),
        "bounds": {"source": 0, "target": 24, "betas": [0.1], "max_paths": 50}
    });
    let out = run(&["bounds"], &cfg, tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("max_paths = 50"), "{err}");
    assert!(!out_dir(&tmp, "t").join("bounds.csv").exists());
}

#[test]
fn sweep_writes_one_run_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "sw");
    let cfg = json!({
        "graph": {"class": "wheel", "n": 8, "r": 1},
        "privacy": {"noise_pct": 20}, "trials": 2, "master_seed": 4, "output_dir": dir,
        "sweep": {"noise_pct": [20, 100], "r": [1, 50]}
    });
    let out = run(&["sweep"], &cfg, tmp.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let index = read(dir.join("sweep_index.csv"));
    assert_eq!(index.lines().count(), 5);
    assert!(index.lines().nth(4).unwrap().starts_with("3,100,,50,"));
    for i in 0..4 {
        assert!(dir.join(format!("run_{i:03}/aggregate.csv")).exists());
    }
    let meta: Value =
        serde_json::from_str(&read(dir.join("run_003/aggregate.csv.meta.json"))).unwrap();
    assert_eq!(meta["graph"]["r"], 50.0);

    // a sweep over r on a grid fails validation before anything runs
    let bad = json!({
        "graph": {"class": "grid", "n": 3}, "privacy": {"noise_pct": 20}, "master_seed": 4,
        "output_dir": out_dir(&tmp, "bad"), "sweep": {"r": [2]}
    });
    let out = run(&["sweep"], &bad, tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir(&tmp, "bad").exists());
}
