use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path, name: &str) -> Value {
    let text = fs::read_to_string(dir.join(format!("{name}.summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_seconds");
    v
}

#[test]
fn diameter_runs_are_reproducible_across_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = ["diameter", "--n", "3", "--replicates", "1", "--seed", "7"];
    for (dir, workers) in [(&a, "1"), (&b, "2")] {
        let mut args = base.to_vec();
        args.extend([
            "--workers",
            workers,
            "--output",
            dir.path().to_str().unwrap(),
        ]);
        let out = fpp(&args);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let csv_a = fs::read(a.path().join("diameter.samples.csv")).unwrap();
    let csv_b = fs::read(b.path().join("diameter.samples.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let header = String::from_utf8(csv_a).unwrap();
    assert!(header.starts_with("replicate,value,recentered,source_i,source_j,mode\n"));

    let (sa, sb) = (summary(a.path(), "diameter"), summary(b.path(), "diameter"));
    for key in ["seed", "n", "replicates", "version", "wall_seconds"] {
        assert!(sa.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(sa["seed"], 7);
    assert_eq!(without_timing(sa), without_timing(sb));
}

#[test]
fn more_replicates_keep_earlier_rows() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, reps) in [(&a, "3"), (&b, "5")] {
        let out = fpp(&[
            "two-point",
            "--n",
            "50",
            "--replicates",
            reps,
            "--output",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    }
    let short = fs::read_to_string(a.path().join("two-point.samples.csv")).unwrap();
    let long = fs::read_to_string(b.path().join("two-point.samples.csv")).unwrap();
    assert!(long.starts_with(&short));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = fpp(&["diameter", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = dir.path().join("bad.json");
    fs::write(&bad_key, r#"{"replicants": 3}"#).unwrap();
    let out = fpp(&["xi", "--config", bad_key.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = fpp(&["xi", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = fpp(&["xi", "--replicates", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{"seed": 5, "replicates": 4, "n": 40, "format": "json"}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = fpp(&[
        "two-point",
        "--config",
        config.to_str().unwrap(),
        "--replicates",
        "2",
        "--output",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let s = summary(&out_dir, "two-point");
    assert_eq!(s["seed"], 5);
    assert_eq!(s["n"], 40);
    assert_eq!(s["replicates"], 2);
    let rows: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("two-point.samples.json")).unwrap())
            .unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
}

#[test]
fn exact_mode_over_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpp(&[
        "diameter",
        "--n",
        "60",
        "--mode",
        "exact",
        "--budget",
        "50",
        "--replicates",
        "1",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn every_subcommand_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let runs: [&[&str]; 8] = [
        &["flooding", "--n", "30", "--replicates", "3"],
        &["hopcount", "--n", "30", "--replicates", "3"],
        &["joint", "--n", "30", "--replicates", "3", "--m", "3"],
        &["poisson-check", "--n", "100", "--replicates", "20"],
        &["xi", "--replicates", "20"],
        &["q-tail", "--replicates", "200", "--x", "1"],
        &["moments", "--replicates", "100"],
        &["two-point", "--n", "30", "--replicates", "3"],
    ];
    for args in runs {
        let mut full = args.to_vec();
        full.extend(["--output", o]);
        let out = fpp(&full);
        let code = out.status.code();
        assert!(
            code == Some(0) || code == Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let name = args[0];
        assert!(
            dir.path().join(format!("{name}.samples.csv")).exists(),
            "{name}"
        );
        assert!(
            summary(dir.path(), name)["statistics"].is_object(),
            "{name}"
        );
    }
}

#[test]
fn verify_smoke_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpp(&[
        "verify",
        "--profile",
        "smoke",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    let code = out.status.code();
    assert!(
        code == Some(0) || code == Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with("criterion"))
        .collect();
    assert_eq!(lines.len(), 12, "{stdout}");
    assert!(lines
        .iter()
        .all(|l| l.contains(" PASS ") || l.contains(" FAIL ")));
    let s = summary(dir.path(), "verify");
    assert_eq!(s["passed"], Value::Bool(code == Some(0)));
}
