use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn di_forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_di-forge"))
        .args(args)
        .env("DI_FORGE_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("cb.json");
    let out = di_forge(&["build", "--n", "64", "--output", path_str(&cb)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&cb).unwrap()).unwrap();
    assert_eq!(doc["params"]["n"], 64);
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 4 + 16);
    // no temp file is left next to the output
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

    let out = di_forge(&["verify", "--input", path_str(&cb)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.lines().count() >= 5);
    assert!(table.lines().all(|l| l.starts_with("PASS")), "{table}");
}

#[test]
fn verify_fails_with_code_5_on_a_damaged_codebook() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("cb.json");
    assert!(
        di_forge(&["build", "--n", "32", "--L", "1", "-o", path_str(&cb)])
            .status
            .success()
    );
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&cb).unwrap()).unwrap();
    // shrink one direction so its radius no longer matches
    let dir0 = doc["nodes"][0]["direction"].as_array_mut().unwrap();
    for v in dir0.iter_mut() {
        *v = Value::from(v.as_f64().unwrap() * 0.5);
    }
    std::fs::write(&cb, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = di_forge(&["verify", "--input", path_str(&cb)]);
    assert_eq!(out.status.code(), Some(5), "{}", stderr(&out));
    assert!(
        stderr(&out).contains("verification failed"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn zero_trials_is_rejected_with_the_estimator_message() {
    let out = di_forge(&[
        "simulate",
        "--n",
        "100",
        "--mode",
        "explicit",
        "--radii",
        "1.34,0.67",
        "--d",
        "0.67",
        "--trials",
        "0",
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("trial count must be positive"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let out = di_forge(&["build", "--n", "64", "--delta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--delta"));

    let out = di_forge(&["build", "--n", "64", "--branching", "4,4,4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--branching"));

    let out = di_forge(&["build", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn regime_violation_exits_4() {
    // E above 1/(delta ln n)
    let out = di_forge(&[
        "build",
        "--n",
        "256",
        "--mode",
        "rate_reliability",
        "--E",
        "2.0",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn placement_failure_exits_3() {
    let out = di_forge(&["simulate", "--n", "64", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn sweep_rr_writes_one_row_per_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = di_forge(&["sweep-rr", "--n", "256", "-o", path_str(&csv_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    for col in [
        "E",
        "linear_rate",
        "rr_lower_bound",
        "rr_converse",
        "status",
    ] {
        assert!(headers.iter().any(|h| h == col), "missing column {col}");
    }
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let ln_n = 256f64.ln();
    let e_col = headers.iter().position(|h| h == "E").unwrap();
    for (row, c) in rows.iter().zip([0.5, 0.1, 0.02]) {
        let e: f64 = row[e_col].parse().unwrap();
        assert!((e - c / ln_n).abs() < 1e-15);
    }
}

fn strip_metadata(text: &str) -> Vec<Value> {
    text.lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("metadata");
            v
        })
        .collect()
}

#[test]
fn identical_config_gives_identical_payload() {
    let args = [
        "simulate",
        "--n",
        "100",
        "--mode",
        "explicit",
        "--radii",
        "1.34,0.67",
        "--d",
        "0.67",
        "--trials",
        "3000",
        "--channel",
        "restricted",
        "--trial-seed",
        "9",
    ];
    let a = di_forge(&args);
    let b = di_forge(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let (a, b) = (
        String::from_utf8(a.stdout).unwrap(),
        String::from_utf8(b.stdout).unwrap(),
    );
    let (ra, rb) = (strip_metadata(&a), strip_metadata(&b));
    assert_eq!(ra.len(), 3);
    for r in &ra {
        for key in ["experiment", "inputs", "p_hat", "ci", "bound", "verdict"] {
            assert!(r.get(key).is_some(), "record lacks {key}");
        }
    }
    assert_eq!(
        serde_json::to_string(&ra).unwrap(),
        serde_json::to_string(&rb).unwrap()
    );
}

#[test]
fn config_file_runs_like_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "sweep-rr", "n": 128, "e_scale": [0.5]}"#,
    )
    .unwrap();
    let from_file = di_forge(&["--config", path_str(&cfg)]);
    let from_flags = di_forge(&["sweep-rr", "--n", "128", "--e-scale", "0.5"]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(from_file.stdout, from_flags.stdout);
}

#[test]
fn report_check_flags_exceeded_records() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.jsonl");
    let out = di_forge(&[
        "simulate",
        "--n",
        "100",
        "--mode",
        "explicit",
        "--radii",
        "1.34,0.67",
        "--d",
        "0.67",
        "--trials",
        "1000",
        "--experiment",
        "missed",
        "-o",
        path_str(&sim),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = di_forge(&["report", "--input", path_str(&sim), "--check"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["records"], 2);

    let out = di_forge(&[
        "simulate",
        "--n",
        "100",
        "--mode",
        "explicit",
        "--radii",
        "1.34,0.67",
        "--d",
        "0.67",
        "--trials",
        "1000",
        "--experiment",
        "false",
        "-o",
        path_str(&sim),
    ]);
    assert!(out.status.success());
    let out = di_forge(&["report", "--input", path_str(&sim), "--check"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn reduce_demo_matches_the_target_law() {
    let out = di_forge(&["reduce-demo", "--trials", "200000", "--format", "csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let expected: f64 = row[1].parse().unwrap();
        let x: f64 = row[0].parse().unwrap();
        assert!((expected - (-x).exp()).abs() < 1e-15);
        let p: f64 = row[4].parse().unwrap();
        assert!(p > 1e-4, "binomial p-value {p} at x = {x}");
    }
}
