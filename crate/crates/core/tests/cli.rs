use std::process::{Command, Output};

use serde_json::Value;

fn tiltlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiltlab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = tiltlab(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o).trim().to_string()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    serde_json::from_str(&stdout(&tiltlab(&all))).unwrap()
}

#[test]
fn documented_invocations() {
    assert_eq!(ok(&["theta", "--p", "2", "--precision", "3", "[t] - p*1"]), "0");
    assert!(ok(&["witt", "gen", "--p", "2", "--n", "2"]).contains("S_1 = x1 + y1 - x0*y0"));
    assert_eq!(ok(&["eval", "--model", "mixed", "--p", "2", "dist(x,x)", "--bind", "x=1+p"]), "0");
}

#[test]
fn arithmetic_and_witt_commands() {
    assert_eq!(ok(&["--precision", "4", "arith", "(1+p)^2"]), "1 + p^3");
    assert_eq!(ok(&["arith", "1+p^(1/2)", "--precision", "2"]), "1 + p^(1/2)");
    // 3 in W(Z) for p = 2 has ghost components (3, 3, 3)
    assert_eq!(ok(&["witt", "add", "1", "2", "--n", "3"]), "W(3; -3; -24)");
    assert_eq!(ok(&["sharp", "t^(1/2)", "--precision", "2"]), "p^(1/2)");
    assert_eq!(ok(&["untilt", "reduce", "[t]"]), "p");
    assert_eq!(ok(&["eval", "--model", "tilt", "D(w, w^(1/2))"]), "alpha^(1/2)");
    assert!(ok(&["xi", "validate"]).ends_with("valid: true"));
}

#[test]
fn approximation_verdicts() {
    let out = ok(&["approx", "tube", "--poly", "y^2 - p", "--point", "p^(1/2) + p", "--gamma", "1", "--precision", "3"]);
    assert!(out.starts_with("true"), "{out}");
    let v = json(&["approx", "tube", "--poly", "y - 1", "--point", "0", "--gamma", "1"]);
    assert_eq!(v["result"]["verdict"], "false");
}

#[test]
fn json_is_versioned_and_deterministic() {
    for args in [
        &["axioms", "--theory", "MVF", "--seed", "7"][..],
        &["--p", "3", "axioms", "--theory", "PERF_alpha", "--seed", "7"][..],
        &["tilt", "1", "--len", "2"][..],
        &["witt", "gen", "--n", "2"][..],
    ] {
        let a = json(args);
        assert_eq!(a["schema_version"], 1, "{args:?}");
        assert!(a.get("result").is_some(), "{args:?}: {a}");
        let mut all = vec!["--format", "json"];
        all.extend_from_slice(args);
        assert_eq!(tiltlab(&all).stdout, tiltlab(&all).stdout);
    }
}

#[test]
fn errors_map_to_exit_codes() {
    let cases: &[(&[&str], i32)] = &[
        (&["frobnicate"], 3),
        (&["eval", "dist(x,"], 3),
        (&["--p", "4", "eval", "1"], 3),
        (&["axioms", "--theory", "nonsense"], 3),
        (&["dxi", "[t]", "[t]", "--varpi", "1"], 1),
        (
            &["approx", "tube", "--tilt", "--poly", "y^2 - p", "--point", "t", "--gamma", "1", "--precision", "2", "--den-log", "4", "--budget", "100"],
            2,
        ),
    ];
    for (args, code) in cases {
        let o = tiltlab(args);
        assert_eq!(o.status.code(), Some(*code), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?} should explain itself");
    }
    let v = json(&["axioms", "--theory", "nonsense"]);
    assert_eq!((v["exit_code"].as_i64(), v["schema_version"].as_i64()), (Some(3), Some(1)));
    assert!(v["error"].is_string());
}
