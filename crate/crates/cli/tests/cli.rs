use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn agmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agmc"))
        .args(args)
        .env_remove("AGMC_BUDGET_SECS")
        .output()
        .unwrap()
}

fn record(out: &Output) -> Value {
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        stdout.lines().count(),
        1,
        "one record per invocation: {stdout}"
    );
    serde_json::from_str(stdout.trim()).unwrap()
}

fn voting(n: usize) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let out = agmc(&[
        "gen",
        "voting",
        "--voters",
        &n.to_string(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let p = dir.path().to_path_buf();
    (dir, p)
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn system(dir: &Path, n: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=n)
        .map(|i| s(&dir.join(format!("voter{i}.mdl"))))
        .collect();
    v.push(s(&dir.join("coercer.mdl")));
    v
}

fn check(dir: &Path, n: usize, formula: &str, method: &str) -> Output {
    let mut args = vec![
        "check".to_string(),
        "--formula".into(),
        formula.into(),
        "--method".into(),
        method.into(),
    ];
    args.extend(system(dir, n));
    agmc(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn gen_then_validate() {
    let (_t, dir) = voting(3);
    let files: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| s(&e.unwrap().path()))
        .collect();
    assert_eq!(files.len(), 7);
    let mut args = vec!["validate"];
    args.extend(files.iter().map(String::as_str));
    let out = agmc(&args);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(record(&out)["verdict"], "Valid");
}

#[test]
fn totality_violation_is_input_error() {
    let (_t, dir) = voting(2);
    let p = dir.join("voter1.mdl");
    let text = std::fs::read_to_string(&p).unwrap();
    let kept: Vec<&str> = text
        .lines()
        .filter(|l| !l.contains("s_one_one_true -> s_one_one_true"))
        .collect();
    assert!(kept.len() < text.lines().count());
    std::fs::write(&p, kept.join("\n")).unwrap();
    let out = agmc(&["validate", &s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    let diag = record(&out)["diagnostics"][0].as_str().unwrap().to_string();
    assert!(
        diag.contains("no transition from (s_one_one_true"),
        "{diag}"
    );
}

#[test]
fn missing_file_is_io_error() {
    let out = agmc(&["validate", "/definitely/not/here.mdl"]);
    assert_eq!(out.status.code(), Some(2));
    let out = agmc(&["ag", "--task", "/definitely/not/here.agt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_error_carries_span() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.mdl");
    std::fs::write(&p, "module M {\n  var x: {a, b};\n  state s [x=c];\n}\n").unwrap();
    let out = agmc(&["validate", &s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    let diag = record(&out)["diagnostics"][0].as_str().unwrap().to_string();
    assert!(diag.contains("bad.mdl:3:"), "{diag}");
}

#[test]
fn monolithic_check() {
    let (_t, dir) = voting(2);
    let formula = s(&dir.join("formula.satl"));
    let r = record(&check(&dir, 2, &formula, "dfs"));
    assert_eq!(
        (
            r["verdict"].as_str(),
            r["states"].as_u64(),
            r["transitions"].as_u64()
        ),
        (Some("Yes"), Some(529), Some(2216))
    );
    assert_eq!(record(&check(&dir, 2, &formula, "apprx"))["verdict"], "Yes");
    let out = check(&dir, 2, "<<Voter1>> G false", "dfs");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(record(&out)["verdict"], "No");
}

#[test]
fn apprx_conclusive_at_four() {
    let (_t, dir) = voting(4);
    let r = record(&check(&dir, 4, &s(&dir.join("formula.satl")), "apprx"));
    assert_eq!(r["verdict"], "Yes");
}

#[test]
fn bad_formula_is_input_error() {
    let (_t, dir) = voting(2);
    assert_eq!(
        check(&dir, 2, "<<Voter1>> G (", "dfs").status.code(),
        Some(1)
    );
    assert_eq!(
        check(&dir, 2, "<<Nobody>> G true", "dfs").status.code(),
        Some(1)
    );
}

#[test]
fn assume_guarantee() {
    let (_t, dir) = voting(2);
    let out = agmc(&["ag", "--task", &s(&dir.join("task.agt"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = record(&out);
    assert_eq!(r["verdict"], "Proved");
    assert_eq!(
        (r["states"].as_u64(), r["transitions"].as_u64()),
        (Some(161), Some(528))
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("verdict: Proved"));
    let out = agmc(&[
        "ag",
        "--task",
        &s(&dir.join("task.agt")),
        "--k",
        "2",
        "--method",
        "apprx",
    ]);
    assert_eq!(record(&out)["verdict"], "Proved");
}

#[test]
fn assume_guarantee_five() {
    let (_t, dir) = voting(5);
    let r = record(&agmc(&["ag", "--task", &s(&dir.join("task.agt"))]));
    assert_eq!(r["verdict"], "Proved");
}

#[test]
fn broken_assumption_gives_counterexample() {
    let (_t, dir) = voting(2);
    let p = dir.join("assumption_voter1.mdl");
    let text = std::fs::read_to_string(&p).unwrap();
    std::fs::write(
        &p,
        text.replace("accepting {wait, punished, spared}", "accepting {wait}"),
    )
    .unwrap();
    let out = agmc(&["ag", "--task", &s(&dir.join("task.agt"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = record(&out);
    assert_eq!(r["verdict"], "Unknown");
    let diags: Vec<&str> = r["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d.as_str().unwrap())
        .collect();
    assert!(
        diags.iter().any(|d| d.contains("premise 2 counterexample")),
        "{diags:?}"
    );
}

#[test]
fn budget_exceeded_exit_code() {
    let (_t, dir) = voting(2);
    let formula = s(&dir.join("formula.satl"));
    let mut args = vec!["--max-states", "50", "check", "--formula", &formula];
    let sys = system(&dir, 2);
    args.extend(sys.iter().map(String::as_str));
    let out = agmc(&args);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(record(&out)["verdict"], "Timeout");
    let task = s(&dir.join("task.agt"));
    let out = agmc(&["--max-states", "10", "ag", "--task", &task]);
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_agmc"))
        .args(["ag", "--task", &task])
        .env("AGMC_BUDGET_SECS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn fair_check_matches_premise_one() {
    let (_t, dir) = voting(2);
    let out = agmc(&[
        "check",
        "--formula",
        "<<Voter1>> G (!(pstatus_1=true) | vote_1=one)",
        "--fair",
        &s(&dir.join("assumption_voter1.mdl")),
        &s(&dir.join("voter1.mdl")),
        &s(&dir.join("voter2.mdl")),
    ]);
    let r = record(&out);
    assert_eq!(
        (r["verdict"].as_str(), r["states"].as_u64()),
        (Some("Yes"), Some(161))
    );
}

#[test]
fn table_over_runs() {
    let mut lines = String::new();
    let mut dirs = Vec::new();
    for n in 2..=4 {
        let (t, dir) = voting(n);
        lines.push_str(
            &String::from_utf8(check(&dir, n, &s(&dir.join("formula.satl")), "apprx").stdout)
                .unwrap(),
        );
        lines.push_str(
            &String::from_utf8(agmc(&["ag", "--task", &s(&dir.join("task.agt"))]).stdout).unwrap(),
        );
        dirs.push(t);
    }
    let recs = dirs[0].path().join("runs.jsonl");
    std::fs::write(&recs, lines).unwrap();
    let out = agmc(&["table", &s(&recs)]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 5, "{table}");
    assert!(
        table.contains("279841") && table.contains("7889"),
        "{table}"
    );

    let empty = dirs[0].path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let out = agmc(&["table", &s(&empty)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);

    std::fs::write(&empty, "not json\n").unwrap();
    assert_eq!(agmc(&["table", &s(&empty)]).status.code(), Some(1));
}

#[test]
fn records_are_deterministic_up_to_timing() {
    let (_t, dir) = voting(2);
    let run = || {
        let mut r = record(&agmc(&["ag", "--task", &s(&dir.join("task.agt"))]));
        strip_timing(&mut r);
        r
    };
    assert_eq!(run(), run());
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("elapsed_ms");
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
