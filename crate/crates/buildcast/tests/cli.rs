//! Integration tests for the `buildcast` binary: subcommand wiring, exit
//! codes, output files, and reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_buildcast"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "expected success for {args:?}\nstderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn gen_small(dir: &Path) -> PathBuf {
    let path = dir.join("builds.csv");
    run_ok(&[
        "gen",
        "--out",
        path.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    path
}

fn csv_data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn gen_writes_default_stream() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_small(dir.path());
    assert_eq!(csv_data_rows(&path), 199);
    let text = fs::read_to_string(&path).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("date,"));
    assert!(header.ends_with(",outcome"));
    assert_eq!(header.split(',').count(), 40);
}

#[test]
fn pipeline_emits_1990_rows_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_small(dir.path());
    let out_dir = dir.path().join("out");
    let args = [
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--smote-percent",
        "900",
        "--grace",
        "200",
        "--tau",
        "0.05",
        "--seed",
        "7",
    ];
    run_ok(&args);

    let names = [
        "run.series.csv",
        "run.summary.json",
        "run.tree.dot",
        "run.tree.json",
        "run.manifest.json",
    ];
    for name in names {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    assert_eq!(csv_data_rows(&out_dir.join("run.series.csv")), 1990);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("run.manifest.json")).unwrap())
            .unwrap();
    let listed: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(listed, names);
    assert_eq!(manifest["rng_algorithm"], "chacha12");
    assert_eq!(manifest["config"]["smote"]["percent"], 900);
    assert_eq!(manifest["config"]["split"]["grace_period"], 200);

    let first: Vec<Vec<u8>> = names
        .iter()
        .map(|n| fs::read(out_dir.join(n)).unwrap())
        .collect();
    run_ok(&args);
    let second: Vec<Vec<u8>> = names
        .iter()
        .map(|n| fs::read(out_dir.join(n)).unwrap())
        .collect();
    assert_eq!(first, second, "same command twice must be byte-identical");
}

#[test]
fn pipeline_smote_zero_keeps_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_small(dir.path());
    let out_dir = dir.path().join("out");
    run_ok(&[
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--smote-percent",
        "0",
    ]);
    assert_eq!(csv_data_rows(&out_dir.join("run.series.csv")), 199);
}

#[test]
fn pipeline_replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_small(dir.path());
    let out_dir = dir.path().join("out");
    run_ok(&[
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--smote-percent",
        "200",
        "--seed",
        "3",
    ]);
    let manifest_path = out_dir.join("run.manifest.json");
    let before = fs::read(out_dir.join("run.series.csv")).unwrap();
    fs::remove_file(out_dir.join("run.series.csv")).unwrap();

    run_ok(&["pipeline", "--replay", manifest_path.to_str().unwrap()]);
    let after = fs::read(out_dir.join("run.series.csv")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn replay_with_tampered_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_small(dir.path());
    let out_dir = dir.path().join("out");
    run_ok(&[
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--smote-percent",
        "0",
    ]);
    let mut bytes = fs::read(&input).unwrap();
    bytes.extend_from_slice(b"\n");
    fs::write(&input, bytes).unwrap();

    let output = bin()
        .args([
            "pipeline",
            "--replay",
            out_dir.join("run.manifest.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("hash"));
}

#[test]
fn smote_subcommand_adds_provenance_columns() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_small(dir.path());
    let out = dir.path().join("augmented.csv");
    run_ok(&[
        "smote",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--smote-percent",
        "900",
        "--seed",
        "7",
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.ends_with(",outcome,provenance,parents"));
    assert_eq!(text.lines().count() - 1, 1990);
    let synthetic = text.lines().filter(|l| l.contains(",synthetic,")).count();
    assert_eq!(synthetic, 1990 - 199);
}

#[test]
fn export_tree_writes_dot_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("builds.csv");
    run_ok(&[
        "gen",
        "--out",
        input.to_str().unwrap(),
        "--instances",
        "1200",
        "--success",
        "600",
        "--failure",
        "600",
        "--overlap",
        "4.0",
        "--informative",
        "1",
        "--seed",
        "11",
    ]);
    let dot_path = dir.path().join("tree.dot");
    run_ok(&[
        "export-tree",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dot_path.to_str().unwrap(),
    ]);
    let dot = fs::read_to_string(&dot_path).unwrap();
    assert!(dot.starts_with("digraph hoeffding_tree {"));
    assert!(dot.contains("\u{2264}"), "internal nodes carry thresholds");

    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("tree.dot.json")).unwrap())
            .unwrap();
    assert!(stats["depth"].as_u64().unwrap() >= 1);
    assert_eq!(stats["instances_learned"], 1200);
}

#[test]
fn usage_errors_exit_1() {
    let out = bin().args(["pipeline", "--no-such-flag"]).output().unwrap();
    assert_eq!(exit_code(&out), 1);

    let out = bin().args(["pipeline"]).output().unwrap();
    assert_eq!(exit_code(&out), 1, "missing --input is a usage error");

    let dir = tempfile::tempdir().unwrap();
    let input = gen_small(dir.path());
    let out = bin()
        .args([
            "pipeline",
            "--input",
            input.to_str().unwrap(),
            "--smote-percent",
            "250",
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1, "percent not a multiple of 100");
    assert!(String::from_utf8_lossy(&out.stderr).contains("multiple of 100"));
}

#[test]
fn data_errors_exit_2() {
    let out = bin()
        .args(["pipeline", "--input", "/nonexistent/builds.csv"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    let header = fs::read_to_string(gen_small(dir.path()))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    let mut row: Vec<&str> = vec!["2013-01-01T00:00:00"];
    let cells: Vec<&str> = vec!["1.0"; 38];
    row.extend(cells);
    row.push("maybe");
    fs::write(&bad, format!("{header}\n{}\n", row.join(","))).unwrap();
    let out = bin()
        .args(["pipeline", "--input", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 1"), "stderr: {stderr}");
    assert!(stderr.contains("maybe"));
}

#[test]
fn failed_run_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,outcome\n2013-01-01T00:00:00,success\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args([
            "pipeline",
            "--input",
            bad.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(
        !out_dir.exists() || fs::read_dir(&out_dir).unwrap().next().is_none(),
        "failed run must leave no partial outputs"
    );
}

#[test]
fn env_var_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    run_ok(&["gen", "--out", a.to_str().unwrap(), "--seed", "42"]);
    let out = bin()
        .args(["gen", "--out", b.to_str().unwrap()])
        .env("BUILDCAST_SEED", "42")
        .output()
        .unwrap();
    assert!(out.status.success());
    run_ok(&["gen", "--out", c.to_str().unwrap(), "--seed", "43"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn repeat_runs_seed_varied_repetitions() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_small(dir.path());
    let out_dir = dir.path().join("out");
    run_ok(&[
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--smote-percent",
        "100",
        "--seed",
        "5",
        "--repeat",
        "2",
        "--jobs",
        "2",
    ]);
    for rep in 0..2 {
        for suffix in ["series.csv", "summary.json", "tree.dot", "tree.json", "manifest.json"] {
            assert!(out_dir.join(format!("run-r{rep}.{suffix}")).exists());
        }
    }
    let m0: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("run-r0.manifest.json")).unwrap())
            .unwrap();
    let m1: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("run-r1.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m0["config"]["seed"], 5);
    assert_eq!(m1["config"]["seed"], 6);
}

#[test]
fn help_and_version_exit_0() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(exit_code(&out), 0);
    let help = String::from_utf8_lossy(&out.stdout);
    for sub in ["gen", "smote", "pipeline", "export-tree"] {
        assert!(help.contains(sub), "help must list `{sub}`");
    }
    let out = bin().arg("--version").output().unwrap();
    assert_eq!(exit_code(&out), 0);
}
