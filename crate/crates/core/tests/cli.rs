use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bacycle"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn fixtures() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["export-fixtures", "--out", "fx"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let root = dir.path().join("fx");
    (dir, root)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn ddg_batch_is_deterministic_and_echoes_config() {
    let (_t, fx) = fixtures();
    let a = run(&fx, &["ddg", "--input", "batch.csv"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let text = stdout(&a);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# "));
    let echo: Value = serde_json::from_str(&first[2..]).unwrap();
    assert_eq!(echo["tool"], "bacycle");
    assert_eq!(echo["command"], "ddg");
    assert_eq!(csv_rows(&text).len(), 3);
    let b = run(&fx, &["--jobs", "1", "ddg", "--input", "batch.csv"]);
    assert_eq!(text, stdout(&b));
}

#[test]
fn prev_shares_bound_terms_with_cycle() {
    let (_t, fx) = fixtures();
    let header = |t: &str| {
        csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(t.as_bytes())
            .headers()
            .unwrap()
            .clone()
    };
    let cycle = stdout(&run(&fx, &["ddg", "--input", "batch.csv"]));
    let prev = stdout(&run(&fx, &["ddg", "--input", "batch.csv", "--estimator", "prev"]));
    let h = header(&cycle);
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let (rc, rp) = (csv_rows(&cycle), csv_rows(&prev));
    let mut any_diff = false;
    for (c, p) in rc.iter().zip(&rp) {
        assert_eq!(c[col("bound_mut")], p[col("bound_mut")]);
        assert_eq!(c[col("bound_wt")], p[col("bound_wt")]);
        assert_eq!(p[col("part_a_mut")], *"");
        any_diff |= c[col("r")] != p[col("r")];
    }
    assert!(any_diff);
}

#[test]
fn missing_structure_names_the_record() {
    let (_t, fx) = fixtures();
    std::fs::remove_file(fx.join("structures/syn00.pdb")).unwrap();
    let o = run(&fx, &["ddg", "--input", "batch.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    let err = &err["error"];
    assert_eq!(err["code"], 2);
    assert_eq!(err["kind"], "input");
    let failures = err["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 3);
    assert!(failures[0].to_string().contains("syn00"));

    let o = run(&fx, &["ddg", "--input", "batch.csv", "--allow-partial"]);
    assert_eq!(o.status.code(), Some(0));

    let o = run(&fx, &["--human-errors", "ddg", "--input", "nope.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(serde_json::from_slice::<Value>(&o.stderr).is_err());
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_arguments_exit_with_input_code() {
    let (_t, fx) = fixtures();
    let o = run(
        &fx,
        &["ddg", "--input", "batch.csv", "--kt", "1", "--calibration", "c.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &fx,
        &[
            "dg",
            "--pdb",
            "structures/syn00.pdb",
            "--group-a",
            "A",
            "--group-b",
            "A",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn benchmark_is_byte_identical_across_runs_and_threads() {
    let (_t, fx) = fixtures();
    let bench = |jobs: &str| {
        let o = run(
            &fx,
            &[
                "--jobs",
                jobs,
                "benchmark",
                "--dataset",
                "dataset.csv",
                "--out",
                "r.json",
                "--folds-csv",
                "f.csv",
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read(fx.join("r.json")).unwrap(),
            std::fs::read(fx.join("f.csv")).unwrap(),
        )
    };
    let a = bench("1");
    let b = bench("1");
    let c = bench("4");
    assert!(a == b, "reruns differ");
    assert!(a == c, "thread count changed output");

    let report: Value = serde_json::from_slice(&a.0).unwrap();
    assert_eq!(report["run"]["command"], "benchmark");
    assert!((report["mean"]["pearson"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    for f in report["folds"].as_array().unwrap() {
        assert!((f["calibration"]["kT"].as_f64().unwrap() - 1.7).abs() < 1e-6);
    }
}

#[test]
fn seed_changes_fold_assignment_and_is_recorded() {
    let (_t, fx) = fixtures();
    let report = |seed: &str| -> Value {
        let o = run(&fx, &["benchmark", "--dataset", "dataset.csv", "--seed", seed]);
        assert!(o.status.success());
        serde_json::from_slice(&o.stdout).unwrap()
    };
    let (a, b) = (report("0"), report("7"));
    assert_eq!(b["assignment"]["seed"], 7);
    assert_eq!(b["config"]["seed"], 7);
    assert_ne!(a["assignment"]["fold_of"], b["assignment"]["fold_of"]);
}

#[test]
fn archive_backed_benchmark_matches_builtin() {
    let (_t, fx) = fixtures();
    let a = run(&fx, &["benchmark", "--dataset", "dataset.csv"]);
    let b = run(
        &fx,
        &["benchmark", "--dataset", "dataset.csv", "--archive", "archive.jsonl"],
    );
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    let (a, b): (Value, Value) = (
        serde_json::from_slice(&a.stdout).unwrap(),
        serde_json::from_slice(&b.stdout).unwrap(),
    );
    assert_eq!(a["folds"], b["folds"]);
    assert_eq!(a["mean"], b["mean"]);
}

#[test]
fn calibrate_rank_prefer_and_dg_run() {
    let (_t, fx) = fixtures();
    let o = run(&fx, &["calibrate", "--dataset", "dataset.csv", "--out", "cal.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cal: Value = serde_json::from_slice(&std::fs::read(fx.join("cal.json")).unwrap()).unwrap();
    assert!((cal["kT"].as_f64().unwrap() - 1.7).abs() < 1e-6);

    let o = run(&fx, &["ddg", "--input", "batch.csv", "--calibration", "cal.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(
        &fx,
        &[
            "rank",
            "--manifest",
            "poses.csv",
            "--group-a",
            "A",
            "--group-b",
            "B",
            "--summary",
            "s.json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ranked = csv_rows(&stdout(&o));
    assert!(!ranked.is_empty());
    let summary: Value = serde_json::from_slice(&std::fs::read(fx.join("s.json")).unwrap()).unwrap();
    assert!(summary["run"].is_object());

    let o = run(
        &fx,
        &[
            "prefer",
            "--pdb",
            "structures/syn00.pdb",
            "--group-a",
            "A",
            "--group-b",
            "B",
            "--sites",
            "A:2,B:3",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&stdout(&o)).len(), 39);

    let o = run(
        &fx,
        &[
            "dg",
            "--pdb",
            "structures/syn00.pdb",
            "--group-a",
            "A",
            "--group-b",
            "B",
            "--scope",
            "interface",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dg: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(dg["r"].as_f64().is_some());
    assert_eq!(dg["run"]["command"], "dg");
}
