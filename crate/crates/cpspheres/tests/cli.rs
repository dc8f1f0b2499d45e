//! Black-box tests of the command-line interface: exit codes, output
//! shapes and the machine-readable format.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpspheres"))
}

fn nixon_path() -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", "nixon.sph"].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_exit_codes_encode_verdicts() {
    let m = nixon_path();
    let t = run(&["eval", "--model", &m, "--world", "x", "--update", "d", "--formula", "p =>[e1,e2,~e1,~e2] h"]);
    assert_eq!(t.status.code(), Some(0));
    assert_eq!(stdout(&t).trim(), "true");
    let f = run(&["eval", "--model", &m, "--world", "x", "--formula", "p =>[e1,e2,~e1,~e2,l,~l] h"]);
    assert_eq!(f.status.code(), Some(1));
    assert_eq!(stdout(&f).trim(), "false");
}

#[test]
fn usage_errors_exit_2() {
    let m = nixon_path();
    assert_eq!(run(&["eval", "--world", "x", "--formula", "p"]).status.code(), Some(2));
    assert_eq!(
        run(&["eval", "--model", &m, "--world", "nope", "--formula", "p"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["eval", "--model", &m, "--world", "x", "--formula", "p =>["]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["eval", "--model", &m, "--world", "x", "--update", "z", "--formula", "p"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn non_paired_set_is_an_evaluation_failure() {
    let m = nixon_path();
    let o = run(&["eval", "--model", &m, "--world", "x", "--formula", "p =>[e1, e2, l] h"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not closed under duals"));
}

#[test]
fn fixtures_all_pass() {
    let o = run(&["fixtures"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("0 failed"));
    assert!(!out.contains("FAIL "));
}

#[test]
fn fixtures_jsonlines_is_machine_readable() {
    let o = run(&["fixtures", "--format", "jsonlines"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut rows = 0;
    for line in out.lines().filter(|l| l.starts_with('{')) {
        let v: serde_json::Value = serde_json::from_str(line).expect("valid json");
        for field in ["fixture", "world", "formula", "update", "expected", "actual"] {
            assert!(v.get(field).is_some(), "missing {field}");
        }
        assert_eq!(v["expected"], v["actual"]);
        rows += 1;
    }
    assert!(rows >= 19);
}

#[test]
fn compare_prints_the_method_grid() {
    let m = nixon_path();
    let o = run(&[
        "compare", "--model", &m, "--world", "x",
        "--row", "p =>[e1,e2,~e1,~e2,l,~l] ~h",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("CP"));
    assert!(out.contains("DIS"));
    assert!(out.lines().last().unwrap().contains("true   false  false  true"));
}

#[test]
fn update_dump_prints_model_file_syntax() {
    let m = nixon_path();
    let o = run(&["update-dump", "--model", &m, "--world", "x", "--set", "e1, e2, ~e1, ~e2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).trim(),
        "spheres x: {x} {x y1} {x y1 y2} {x v1 y1 y2} {x v1 v2 y1 y2}"
    );
}

#[test]
fn weights_prints_counts_and_chain() {
    let m = nixon_path();
    let o = run(&[
        "weights", "--model", &m, "--world", "x",
        "--formula", "~h", "--formula", "p", "--formula", "h",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("w_x(p) = (0,1,1,1,1)"));
    assert!(out.contains("chain: ~h < p < h"));
}

#[test]
fn translate_certifies_the_rewrite() {
    let m = nixon_path();
    let o = run(&["translate", "--model", &m, "--world", "x", "--formula", "h <=[e1, ~e1] e1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("model-relative"));
    assert!(out.contains("certificate: original true, rewritten true"));
    // The rewrite must parse and be free of non-empty cp-sets.
    let formula_line = out.lines().nth(1).unwrap();
    let f = cpspheres::formula::parse(formula_line).unwrap();
    assert_eq!(f.cpl(), 0);
}

#[test]
fn trace_prints_the_step_tree() {
    let m = nixon_path();
    let o = run(&[
        "eval", "--model", &m, "--world", "x", "--trace",
        "--formula", "p =>[e1,e2,~e1,~e2] h",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("gen 1"));
    assert!(out.lines().count() > 2);
}

#[test]
fn sweep_reports_are_clean_at_small_bounds() {
    let o = run(&["sweep", "--max-worlds", "2", "--atoms", "p", "--suite", "theorems"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("violations=0"));
}
