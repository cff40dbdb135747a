mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;

fn cgr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgr")).args(args).output().expect("spawn cgr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn setup_scripted(dir: &Path) -> (String, String) {
    let plan = three_item_run();
    let items = dir.join("items.jsonl");
    let rows: Vec<_> = plan.items.iter().map(|i| serde_json::to_value(i).unwrap()).collect();
    write_jsonl(&items, &rows);
    let scripts = dir.join("scripts.json");
    std::fs::write(&scripts, scripts_json(&plan).to_string()).unwrap();
    (items.display().to_string(), scripts.display().to_string())
}

fn scripted_run(dir: &Path, run_id: &str) -> Output {
    let (items, scripts) = setup_scripted(dir);
    let out = dir.join("out").display().to_string();
    #[rustfmt::skip]
    let args = [
        "run", "--run-id", run_id, "--items", &items, "--solver", "solver-s", "--generator", "gen-g",
        "--scripted", &scripts, "--workers", "1", "--timeout", "20", "--out", &out,
    ];
    cgr(&args)
}

#[test]
fn scripted_run_then_audit_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = scripted_run(dir.path(), "cli1");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let results = dir.path().join("out/results/cli1.jsonl");
    let ledger = dir.path().join("out/ledger/cli1.jsonl");
    assert_eq!(std::fs::read_to_string(&results).unwrap().lines().count(), 3);

    let audit_dir = dir.path().join("audit");
    let scaffolds = dir.path().join("out/scaffolds");
    #[rustfmt::skip]
    let out = cgr(&[
        "audit", "--results", results.to_str().unwrap(), "--ledger", ledger.to_str().unwrap(),
        "--scaffolds", scaffolds.to_str().unwrap(), "--out", audit_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0 / 3"), "{text}");
    let coverage = std::fs::read_to_string(audit_dir.join("audit_coverage.csv")).unwrap();
    assert!(coverage.contains("assisted,3,3"), "{coverage}");

    let report_dir = dir.path().join("report");
    let out = cgr(&[
        "report",
        "--results",
        results.to_str().unwrap(),
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csvs = std::fs::read_dir(&report_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert!(csvs >= 5, "{csvs} csv files");
}

#[test]
fn rerun_with_same_id_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&scripted_run(dir.path(), "again")), 0);
    let results = dir.path().join("out/results/again.jsonl");
    let before = std::fs::read_to_string(&results).unwrap();
    let out = scripted_run(dir.path(), "again");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("already has results"), "{}", stderr(&out));
    assert_eq!(std::fs::read_to_string(&results).unwrap(), before);
}

#[test]
fn unreachable_backend_fails_without_records() {
    let dir = tempfile::tempdir().unwrap();
    let items = dir.path().join("items.jsonl");
    write_jsonl(&items, &[item_json("q1", "OBQA", 'A')]);
    let backend = dir.path().join("backend.toml");
    std::fs::write(
        &backend,
        "endpoint = \"http://127.0.0.1:1/v1\"\nmodel_label = \"nowhere\"\ntimeout_s = 2\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    #[rustfmt::skip]
    let out = cgr(&[
        "run", "--run-id", "down", "--items", items.to_str().unwrap(), "--solver", backend.to_str().unwrap(),
        "--generator", backend.to_str().unwrap(), "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("q1"), "{}", stderr(&out));
    let results = std::fs::read_to_string(out_dir.join("results/down.jsonl")).unwrap_or_default();
    assert_eq!(results.lines().count(), 0);
}

#[test]
fn malformed_items_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let items = dir.path().join("items.jsonl");
    let mut bad = item_json("q1", "OBQA", 'E');
    bad["options"][0]["id"] = "B".into();
    write_jsonl(&items, &[bad]);
    #[rustfmt::skip]
    let out = cgr(&[
        "run", "--run-id", "bad", "--items", items.to_str().unwrap(), "--solver", "s", "--generator", "g",
        "--scripted", "/nonexistent.json", "--out", dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(!dir.path().join("out/results/bad.jsonl").exists());
}

#[test]
fn replay_fixture_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = cgr(&["replay-fixture", "--replicates", "1000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["38.11%", "66.21%", "+28.10 pp", "62.19%", "+14.11 pp", "64.65%", "22.90", "33.24"] {
        assert!(text.contains(needle), "missing {needle}\n{text}");
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().count() >= 4);
}

#[test]
fn bootstrap_rejects_too_few_replicates() {
    let out = cgr(&["bootstrap", "--replicates", "10"]);
    assert_eq!(code(&out), 2);
    let out = cgr(&["bootstrap", "--replicates", "1000", "--unit", "pair", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let again = cgr(&["bootstrap", "--replicates", "1000", "--unit", "pair", "--seed", "3"]);
    assert_eq!(out.stdout, again.stdout);
}
