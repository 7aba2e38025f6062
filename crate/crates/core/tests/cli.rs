use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sage(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sage"))
        .args(args)
        .env("SAGE_RUN_ROOT", root)
        .output()
        .expect("binary runs")
}

fn ok(root: &Path, args: &[&str]) -> String {
    let out = sage(root, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(root: &Path, args: &[&str]) -> i32 {
    sage(root, args).status.code().expect("exited normally")
}

fn lines(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.trim().is_empty()).count()
}

const GENESIS: &[&str] = &["genesis", "--procedural", "2", "--n-tasks", "20", "--seed", "3"];

#[test]
fn full_pipeline_under_a_run_root() {
    let root = tempfile::tempdir().unwrap();
    let r = root.path();
    let out = ok(r, GENESIS);
    assert!(out.contains("accepted 20"), "{out}");
    assert_eq!(lines(&r.join("data/tasks.jsonl")), 20);
    for f in ["rules.json", "trajectories.jsonl", "scenes.json", "rejection-statistics.json", "config.json"] {
        assert!(r.join("data").join(f).is_file(), "{f}");
    }

    ok(r, &["evolve", "--steps", "10"]);
    for f in ["checkpoint.json", "trace.csv", "trace.svg", "store.json", "summary.json", "config.json"] {
        assert!(r.join("evolve").join(f).is_file(), "{f}");
    }
    assert_eq!(lines(&r.join("evolve/trace.csv")), 11, "header plus one row per step");
    assert!(fs::read_to_string(r.join("evolve/trace.svg")).unwrap().starts_with("<svg"));

    let out = ok(
        r,
        &["navigate", "--policy", "linear", "--checkpoint", "evolve/checkpoint.json", "--store", "evolve/store.json", "--episodes", "8"],
    );
    assert!(out.contains("8 episodes"), "{out}");
    assert_eq!(lines(&r.join("navigate/episodes.jsonl")), 8);

    ok(r, &["eval", "--episodes", "navigate/episodes.jsonl", "--out", "again.csv"]);
    assert_eq!(fs::read(r.join("again.csv")).unwrap(), fs::read(r.join("navigate/metrics.csv")).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let files = ["data/tasks.jsonl", "data/rules.json", "evolve/trace.csv", "evolve/checkpoint.json", "nav/episodes.jsonl"];
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let root = tempfile::tempdir().unwrap();
        ok(root.path(), GENESIS);
        ok(root.path(), &["evolve", "--steps", "5"]);
        ok(root.path(), &["navigate", "--policy", "random", "--episodes", "6", "--out", "nav"]);
        snapshots.push(files.map(|f| fs::read(root.path().join(f)).unwrap()));
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn training_flags_shape_the_trace() {
    let root = tempfile::tempdir().unwrap();
    let r = root.path();
    ok(r, GENESIS);
    ok(r, &["evolve", "--steps", "1", "--out", "one"]);
    assert_eq!(lines(&r.join("one/trace.csv")), 2);

    ok(r, &["evolve", "--steps", "6", "--eta", "fixed:0.0", "--out", "off"]);
    let text = fs::read_to_string(r.join("off/trace.csv")).unwrap();
    let mut rows = csv_rows(&text);
    let header = rows.remove(0);
    let eta = header.iter().position(|h| h == "eta").unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|row| row[eta].parse::<f64>().unwrap() == 0.0));

    ok(r, &["evolve", "--steps", "0", "--out", "zero"]);
    assert_eq!(lines(&r.join("zero/trace.csv")), 1);
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let root = tempfile::tempdir().unwrap();
    let r = root.path();
    fs::write(r.join("run.json"), r#"{"master_seed": 4, "mazes": 1, "genesis": {"n_tasks": 6}}"#).unwrap();
    ok(r, &["--config", "run.json", "genesis", "--out", "a"]);
    assert_eq!(lines(&r.join("a/tasks.jsonl")), 6);
    ok(r, &["--config", "run.json", "genesis", "--n-tasks", "4", "--out", "b"]);
    assert_eq!(lines(&r.join("b/tasks.jsonl")), 4);
    let written: serde_json::Value = serde_json::from_str(&fs::read_to_string(r.join("b/config.json")).unwrap()).unwrap();
    assert_eq!(written["genesis"]["n_tasks"], 4);
    assert_eq!(written["master_seed"], 4);
}

#[test]
fn task_file_and_grid_file_forms() {
    let root = tempfile::tempdir().unwrap();
    let r = root.path();
    ok(r, &["genesis", "--procedural", "1", "--n-tasks", "3", "--out", "set/tasks.jsonl", "--rules", "kb/rules.json"]);
    assert_eq!(lines(&r.join("set/tasks.jsonl")), 3);
    assert!(r.join("kb/rules.json").is_file());
    assert!(r.join("set/rejection-statistics.json").is_file());
    ok(r, &["evolve", "--tasks", "set/tasks.jsonl", "--rules", "kb/rules.json", "--data", "set", "--steps", "2"]);

    // A grid written by a previous run can be fed back in.
    let grid = fs::read_dir(r.join("set/grids")).unwrap().next().unwrap().unwrap().path();
    let grid = grid.to_str().unwrap();
    ok(r, &["genesis", "--grid", grid, "--n-tasks", "2", "--out", "from-file"]);
    assert_eq!(lines(&r.join("from-file/tasks.jsonl")), 2);
}

#[test]
fn zero_counts_produce_valid_empty_outputs() {
    let root = tempfile::tempdir().unwrap();
    let r = root.path();
    ok(r, &["genesis", "--procedural", "1", "--n-tasks", "0"]);
    assert_eq!(lines(&r.join("data/tasks.jsonl")), 0);
    ok(r, &["genesis", "--procedural", "1", "--n-tasks", "3", "--out", "d3"]);
    ok(r, &["navigate", "--data", "d3", "--policy", "oracle", "--episodes", "0"]);
    assert_eq!(fs::read_to_string(r.join("navigate/metrics.csv")).unwrap().trim_end(), "category,episodes,sr,spl,sr_llm,spl_llm");
    assert_eq!(lines(&r.join("navigate/episodes.jsonl")), 0);
}

#[test]
fn exit_codes_separate_usage_data_and_success() {
    let root = tempfile::tempdir().unwrap();
    let r = root.path();
    assert_eq!(code(r, &["--help"]), 0);
    assert_eq!(code(r, &["--version"]), 0);
    assert_eq!(code(r, &["fly"]), 1);
    assert_eq!(code(r, &["evolve", "--eta", "sometimes"]), 1);
    assert_eq!(code(r, &["genesis", "--grid", "g.txt", "--procedural", "2"]), 1);
    assert_eq!(code(r, &["evolve"]), 2, "no dataset yet");
    // Any problem with the configuration file is a usage error.
    assert_eq!(code(r, &["--config", "missing.json", "genesis"]), 1);
    fs::write(r.join("bad.json"), "{\"mazes\": \"five\"}").unwrap();
    assert_eq!(code(r, &["--config", "bad.json", "genesis"]), 1);
    fs::write(r.join("g.txt"), "3 1 0.1\n..x\n").unwrap();
    assert_eq!(code(r, &["genesis", "--grid", "g.txt"]), 2);

    ok(r, &["genesis", "--procedural", "1", "--n-tasks", "4"]);
    assert_eq!(code(r, &["navigate", "--policy", "linear"]), 1, "linear needs a checkpoint");
    assert_eq!(code(r, &["evolve", "--val-fraction", "1.5"]), 1);
    assert_eq!(code(r, &["evolve", "--eps-exp", "0.1"]), 1, "eps_exp below eps_std");
    fs::write(r.join("episodes.jsonl"), "{not json}\n").unwrap();
    assert_eq!(code(r, &["eval", "--episodes", "episodes.jsonl"]), 2);
    let err = String::from_utf8(sage(r, &["evolve", "--data", "nowhere"]).stderr).unwrap();
    assert!(err.starts_with("sage: "), "{err}");
}
