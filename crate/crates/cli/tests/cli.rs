use std::fs;
use std::process::{Command, Output};

use lpcheck::queens::{brute_force, NQUEENS_SOURCE};
use lpcheck::{parse_term, Signature};

fn lpcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn records(o: &Output) -> Vec<serde_json::Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

#[test]
fn solve_lists_oracle_solutions() {
    let o = lpcheck(&["solve", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.pop(), Some("2 solutions"));
    lines.sort();
    let expected: Vec<String> = brute_force(4).iter().map(|s| s.to_line()).collect();
    assert_eq!(lines, expected);
}

#[test]
fn solve_edge_cases() {
    let o = lpcheck(&["solve", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 solutions\n");
    assert_eq!(lpcheck(&["solve", "0"]).status.code(), Some(2));
    let o = lpcheck(&["solve", "1", "--board"]);
    assert_eq!(stdout(&o), "1;1\nQ\n\n1 solution\n");
}

#[test]
fn solve_records_and_oracle_check() {
    let o = lpcheck(&[
        "solve",
        "6",
        "--rule",
        "fair",
        "--occur-check",
        "off",
        "--check",
        "--format",
        "records",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let recs = records(&o);
    let summary = recs.last().unwrap();
    assert_eq!(summary["solutions"], 4);
    assert_eq!(summary["oracle_match"], true);
    assert_eq!(recs.len(), 5);
}

#[test]
fn query_against_program_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nqueens.pl");
    fs::write(&path, NQUEENS_SOURCE).unwrap();
    let p = path.to_str().unwrap();
    let o = lpcheck(&["query", p, "pqs(0,A,B,C)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("1 answer\n"));

    let o = lpcheck(&["query", p, "pqs(2,[X,Y],U,D)", "--format", "records"]);
    let recs = records(&o);
    let sig = Signature::default_queens();
    let answers: Vec<_> = recs.iter().filter(|r| r["record"] == "answer").collect();
    assert!(answers.is_empty());
    let o = lpcheck(&["query", p, "pq(1,[X,Y],[Y|U],D)", "--format", "records"]);
    for r in records(&o).iter().filter(|r| r["record"] == "answer") {
        for (_, t) in r["bindings"].as_object().unwrap() {
            let text = t.as_str().unwrap();
            let back = parse_term(text, &sig).unwrap();
            assert_eq!(back.to_string(), text);
        }
    }
}

#[test]
fn query_errors_and_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.pl");
    fs::write(&path, "p(X) :- p(X).\n").unwrap();
    let p = path.to_str().unwrap();
    let o = lpcheck(&["query", p, "p(a"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:4"));
    let o = lpcheck(&["query", p, "p(a)", "--depth", "5", "--format", "records"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = records(&o);
    assert_eq!(recs[0]["record"], "truncated");
    assert_eq!(recs[1]["answers"], 0);
    let missing = dir.path().join("missing.pl");
    assert_eq!(
        lpcheck(&["query", missing.to_str().unwrap(), "p(a)"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_bound_for_one_board() {
    let o = lpcheck(&["verify", "bound", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("bound = 8"));
}

#[test]
fn verify_all_defaults_pass() {
    let o = lpcheck(&["verify", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("7 checks, 0 failed\n"));
}

#[test]
fn verify_mutants() {
    let o = lpcheck(&[
        "verify",
        "model",
        "--mutate",
        "drop-ds-wrapper",
        "--format",
        "records",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let recs = records(&o);
    assert_eq!(recs[0]["verdict"], "fail");
    assert!(recs.iter().any(|r| r["record"] == "counterexample"));
    let o = lpcheck(&["verify", "fixpoint", "--mutate", "nonuniform-strip"]);
    assert_eq!(o.status.code(), Some(1));
    // the swapped call is equivalent to the original
    let o = lpcheck(&["verify", "model", "--mutate", "swap-us-ds"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_output_is_deterministic() {
    let args = [
        "verify",
        "model",
        "--mutate",
        "nonuniform-strip",
        "--depth",
        "3",
        "--format",
        "records",
    ];
    assert_eq!(lpcheck(&args).stdout, lpcheck(&args).stdout);
}

#[test]
fn verify_resource_cap_and_usage() {
    let o = lpcheck(&["verify", "model", "--max-instances", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(lpcheck(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(
        lpcheck(&["verify", "model", "--spec", "t"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("sig.txt");
    fs::write(&bad, "s/1\n").unwrap();
    let o = lpcheck(&["verify", "model", "--signature", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let good = dir.path().join("sig2.txt");
    fs::write(&good, "0/0\ns/1\n[]/0\ncons/2\n").unwrap();
    let o = lpcheck(&[
        "verify",
        "model",
        "--depth",
        "3",
        "--signature",
        good.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
}
