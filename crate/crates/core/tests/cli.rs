use std::fs;
use std::process::Command as Process;

use serde_json::Value;
use tent_core::cli::{self, manifest_path, sha256_hex, RunManifest};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("tentctl").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

fn json_lines(s: &str) -> Vec<Value> {
    s.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn count_small_periods() {
    assert_eq!(ok(&["count", "--period", "5"]), "6\n");
    assert_eq!(ok(&["count", "--period", "1"]), "2\n");
    assert_eq!(ok(&["count", "--period", "12"]), "335\n");
}

#[test]
fn enumerate_two_cycle_and_subcycles() {
    let lines = json_lines(&ok(&["enumerate", "--H", "3", "--period", "2"]));
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["points"], serde_json::json!(["3/10", "9/10"]));

    let with_sub = json_lines(&ok(&["enumerate", "--H", "3", "--period", "2", "--include-subcycles"]));
    assert_eq!(with_sub.len(), 3);

    let csv = ok(&["enumerate", "--H", "4", "--period", "5", "--format", "csv"]);
    assert!(csv.lines().count() > 1);
}

#[test]
fn find_then_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let found = dir.path().join("found.jsonl");
    let found_s = found.to_str().unwrap();
    ok(&["find", "--H", "3", "--period", "2", "--regime", "neg", "--grid", "50", "--output", found_s]);
    let records = json_lines(&fs::read_to_string(&found).unwrap());
    assert!(!records.is_empty());
    assert!(records.iter().any(|r| r["tau"] == 2));

    let report = ok(&["verify", "--H", "3", "--period", "2", "--input", found_s]);
    assert!(!report.is_empty());

    // At the negative-regime midpoint the fixed point 0 is unstable, so not every cycle is found.
    let (code, _, err) = run(&["verify", "--H", "3", "--period", "2", "--input", found_s, "--require-all"]);
    assert_eq!(code, 1);
    assert!(err.contains("error"));
}

#[test]
fn verify_rejects_a_corrupted_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let found = dir.path().join("found.jsonl");
    let found_s = found.to_str().unwrap();
    ok(&["find", "--H", "3", "--period", "2", "--regime", "neg", "--seed-value", "1/2", "--output", found_s]);
    let text = fs::read_to_string(&found).unwrap();
    let mut record: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    record["points"][0] = Value::String("0.31".into());
    fs::write(&found, format!("{record}\n")).unwrap();
    let (code, _, _) = run(&["verify", "--H", "3", "--period", "2", "--input", found_s]);
    assert_eq!(code, 1);
}

#[test]
fn manifests_replay_to_the_same_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cycles.jsonl");
    let trace = dir.path().join("trace.csv");
    ok(&[
        "find", "--H", "4", "--period", "5", "--regime", "pos", "--offset", "2/5", "--seed-value", "1/4",
        "--output", out.to_str().unwrap(), "--trace", trace.to_str().unwrap(),
    ]);
    for artifact in [&out, &trace] {
        let mpath = manifest_path(artifact);
        let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(&mpath).unwrap()).unwrap();
        assert_eq!(manifest.command, "find");
        assert_eq!(manifest.output_digest, sha256_hex(&fs::read(artifact).unwrap()));
        assert!(manifest.parameters.contains_key("precision"));
        let replayed = ok(&["replay", "--manifest", mpath.to_str().unwrap()]);
        assert_eq!(replayed.trim(), format!("match {}", manifest.output_digest));
    }
}

#[test]
fn replay_detects_a_changed_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hist.csv");
    ok(&["cantor", "--mode", "first-type", "--count", "2000", "--seed", "3", "--output", out.to_str().unwrap()]);
    let mpath = manifest_path(&out);
    let mut manifest: RunManifest = serde_json::from_str(&fs::read_to_string(&mpath).unwrap()).unwrap();
    manifest.output_digest = sha256_hex(b"something else");
    fs::write(&mpath, serde_json::to_string(&manifest).unwrap()).unwrap();
    let (code, _, err) = run(&["replay", "--manifest", mpath.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("digest mismatch"), "{err}");
}

#[test]
fn trace_csv_records_each_step() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    ok(&[
        "find", "--H", "4", "--period", "5", "--regime", "neg", "--offset", "-2/5", "--seed-value", "0.85",
        "--trace", trace.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,x_n,U_n,Uhat_n"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.len() > 5);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 4);
        assert_eq!(row[0], (i + 1).to_string());
    }
}

#[test]
fn trace_requires_a_single_seed() {
    let (code, _, err) = run(&["find", "--H", "3", "--period", "2", "--regime", "neg", "--grid", "5", "--trace", "t.csv"]);
    assert_eq!(code, 1);
    assert!(err.contains("--trace"), "{err}");
}

#[test]
fn graph_and_cantor_outputs_are_csv() {
    let graph = ok(&["graph", "--H", "3", "--period", "2", "--offset", "0", "--regime", "neg", "--samples", "11"]);
    let mut lines = graph.lines();
    assert_eq!(lines.next(), Some("x,f,f_T,zeta,F"));
    assert_eq!(lines.count(), 11);

    let hist = ok(&["cantor", "--mode", "cycles", "--period", "6", "--bins", "27"]);
    let mut lines = hist.lines();
    assert_eq!(lines.next(), Some("bin_left,bin_right,count,density"));
    assert_eq!(lines.count(), 27);
}

#[test]
fn runs_are_deterministic() {
    let args = ["find", "--H", "3", "--period", "3", "--regime", "pos", "--offset", "-1/2", "--grid", "40"];
    assert_eq!(ok(&args), ok(&args));
    let cantor = ["cantor", "--mode", "first-type", "--count", "5000", "--seed", "9"];
    assert_eq!(ok(&cantor), ok(&cantor));
}

#[test]
fn errors_name_the_offending_flag() {
    let (code, _, err) = run(&["find", "--H", "3", "--period", "2", "--regime", "pos", "--offset", "3/2"]);
    assert_eq!(code, 1);
    assert!(err.contains("--offset"), "{err}");

    let (code, _, err) = run(&["enumerate", "--H", "1", "--period", "2"]);
    assert_ne!(code, 0);
    assert!(err.contains("--H"), "{err}");

    let (code, _, _) = run(&["count", "--period", "0"]);
    assert_ne!(code, 0);
}

#[test]
fn binary_honours_the_precision_environment_variable() {
    let bin = env!("CARGO_BIN_EXE_tentctl");
    let find = |precision: Option<&str>| {
        let mut cmd = Process::new(bin);
        cmd.args(["find", "--H", "3", "--period", "2", "--regime", "neg", "--seed-value", "1/2"]);
        cmd.env_remove(cli::PRECISION_ENV);
        if let Some(p) = precision {
            cmd.env(cli::PRECISION_ENV, p);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let default = json_lines(&find(None));
    let wide = json_lines(&find(Some("40")));
    let digits = |v: &Value| v["points"][0].as_str().unwrap().len();
    assert!(digits(&wide[0]) > digits(&default[0]));

    let out = Process::new(bin).args(["count", "--period", "5"]).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "6\n");
}
