use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(rel)
}

fn csm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_m1_succeeds() {
    let out = csm(&["check", path(&fixture("m1/m1.csm"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("csm M1: ok"));
}

#[test]
fn check_reports_invalid_models() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csm");
    std::fs::write(
        &bad,
        "csm-model 1\ncsm A\n  input x\n  state s\n  init t\n  trans s -> s : 1\nend\n",
    )
    .unwrap();
    let out = csm(&["check", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("invalid"));

    std::fs::write(
        &bad,
        "csm-model 1\ncsm A\n  state s\n  init s\n  trans s -> s : 0\nend\n",
    )
    .unwrap();
    let out = csm(&["check", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
}

#[test]
fn analyze_original_finds_the_deadlock() {
    let out = csm(&["analyze", path(&fixture("design-original/design.csm"))]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("DEADLOCK: SendStopIteration_ProduceDecisionRequest"));
    assert!(text.contains("entered by 3 edge(s)"));
}

#[test]
fn analyze_repaired_is_clean() {
    let out = csm(&["analyze", path(&fixture("design-repaired/design.csm"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("no deadlocks"));
}

#[test]
fn compose_then_analyze_document() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture("design-original/design.csm");
    let out = csm(&["compose", path(&model)]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout(&out);
    assert_eq!(
        stdout(&csm(&["compose", path(&model)])),
        doc,
        "byte-stable output"
    );
    let json: serde_json::Value = serde_json::from_str(&doc).unwrap();
    assert_eq!(json["nodes"].as_array().unwrap().len(), 14);

    let graph = dir.path().join("graph.json");
    std::fs::write(&graph, &doc).unwrap();
    // a document carries no accepting patterns, so both terminals are deadlocks
    let out = csm(&["analyze", path(&graph), "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["deadlocks"].as_array().unwrap().len(), 2);
    let out = csm(&["analyze", path(&graph), "--accepting", "EndDes_*"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("accepting terminal: EndDes_Wait"));
}

#[test]
fn export_marks_deadlock() {
    let out = csm(&["export", path(&fixture("design-original/design.csm"))]);
    assert_eq!(out.status.code(), Some(0));
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("fillcolor=black").count(), 1);
    let out = csm(&["export", path(&fixture("design-repaired/design.csm"))]);
    assert!(!stdout(&out).contains("fillcolor=black"));
}

#[test]
fn simulate_m1() {
    let out = csm(&[
        "simulate",
        path(&fixture("m1/m1.csm")),
        path(&fixture("m1/m1.env")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("wait -> run"));
    assert!(text.contains("global={end,go} run -> wait"));

    let dir = tempfile::tempdir().unwrap();
    let env = dir.path().join("design.env");
    std::fs::write(&env, "Setup\n\n\nSuspend, M_OF\n").unwrap();
    let run = |seed: &str| {
        csm(&[
            "simulate",
            path(&fixture("design-original/design.csm")),
            path(&env),
            "--policy",
            "random",
            "--seed",
            seed,
            "--format",
            "json",
        ])
    };
    let a = run("7");
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, run("7").stdout);
    let trace: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(trace["steps"].as_array().unwrap().len(), 4);
}

#[test]
fn transform_emits_parseable_csms() {
    let out = csm(&["transform", path(&fixture("design-original/design.csm"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("csm-model 1\n"));
    assert_eq!(text.matches("\ncsm ").count(), 2);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("t.csm");
    std::fs::write(&file, &text).unwrap();
    assert_eq!(csm(&["check", path(&file)]).status.code(), Some(0));
}

#[test]
fn diff_original_against_repaired() {
    let out = csm(&[
        "diff",
        path(&fixture("design-original/design.csm")),
        path(&fixture("design-repaired/design.csm")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out)
        .contains("+ edge SendStopIteration_ProduceDecisionRequest -> DecisionNeeded_Wait"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(csm(&["bogus"]).status.code(), Some(1));
    assert_eq!(csm(&["analyze", "--nope", "x"]).status.code(), Some(1));
    assert_eq!(csm(&["analyze", "/does/not/exist"]).status.code(), Some(1));
    let out = csm(&["export", path(&fixture("m1/m1.csm")), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(csm(&["--help"]).status.code(), Some(0));
}
