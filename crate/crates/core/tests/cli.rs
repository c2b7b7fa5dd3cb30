use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_germ-moduli"));
    c.env_remove("GERM_MODULI_ATLAS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value, String) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = run(&full);
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("bad JSON ({e}): {text}"));
    (out.status.code().unwrap(), v, text)
}

fn schema() -> jsonschema::JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::options()
        .with_draft(jsonschema::Draft::Draft7)
        .compile(&raw)
        .expect("schema compiles")
}

fn assert_valid(schema: &jsonschema::JSONSchema, v: &Value) {
    if let Err(errors) = schema.validate(v) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("schema violations: {msgs:#?}\n{v:#}");
    }
}

#[test]
fn fold_under_c_omega_p_has_two_moduli() {
    let out = run(&[
        "moduli", "--map", "x, y^2", "--source-vars", "x,y", "--target-vars", "u,v", "--group", "C",
        "--side", "target", "--kmax", "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("stabilized: quotient_dim 2"), "{text}");
    assert!(text.contains("{(x, 0), (x*y, 0)}"), "{text}");
}

#[test]
fn boundary_germ_has_no_certificate() {
    let out = run(&["wqh", "--map", "x, x*y+y^5+y^7", "--group", "A", "--side", "target"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("no certificate"), "{text}");
}

#[test]
fn fold_under_a_omega_n_is_inconclusive() {
    let out = run(&["moduli", "--map", "x, y^2", "--group", "A", "--side", "source", "--kmax", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("not stabilized"), "{text}");
    assert!(text.contains("[0, 1, 2, 4, 6, 9, 12, 16, 20]"), "{text}");
    assert!(String::from_utf8(out.stderr).unwrap().contains("inconclusive"));
}

#[test]
fn json_reports_validate_against_schema() {
    let schema = schema();
    let cases: &[(&[&str], i32)] = &[
        (&["wqh", "--map", "x, x*y+y^5+y^7*z", "--source-vars", "x,y,z", "--group", "A", "--side", "target"], 0),
        (&["wqh", "--map", "x^2+y^3, y^2+x^3", "--group", "A", "--side", "target", "--trace"], 0),
        (&["moduli", "--map", "x, y^2", "--group", "C", "--side", "target", "--kmax", "6"], 0),
        (&["moduli", "--map", "x^3+y^4", "--group", "K", "--side", "source", "--kmax", "6", "--route", "both"], 0),
        (&["moduli", "--map", "x, y^2", "--group", "A", "--side", "source", "--kmax", "6"], 2),
        (&["kernel", "--map", "x^2, x^3", "--group", "L", "--side", "target", "--kmax", "5"], 0),
        (&["invariants", "--map", "x^5+y^5+x^3*y^3", "--mu", "--tau", "--varchenko", "--gradient"], 0),
        (&["bounds", "--map", "x^4+y^5, x*y", "--mode", "generic"], 0),
        (&["bounds", "--map", "x^3+y^4", "--mode", "hypersurface", "--coefficients", "1"], 0),
        (&["criterion", "--map", "x^2+y^5, y^7", "--monomial", "0, x*y^5", "--base", "K"], 0),
        (&["euler", "--density", "1 + x*y", "--weights", "1,2"], 0),
        (&["mequiv", "--omega0", "1", "--omega1", "1 + x", "--gens", "x, y", "--euler", "1,1", "--vars", "x,y"], 0),
        (&["atlas", "list"], 0),
        (&["atlas", "instantiate", "--table", "k_examples", "--entry", "g-klm", "--param", "k=5", "--param", "l=5", "--param", "m=7"], 0),
        (&["atlas", "verify", "--table", "fold_cusp"], 0),
    ];
    for (args, code) in cases {
        let (got, v, _) = json(args);
        assert_eq!(got, *code, "{args:?}");
        assert_valid(&schema, &v);
        assert_eq!(v["status"] == "success", *code == 0, "{args:?}");
    }
}

#[test]
fn timing_is_opt_in() {
    let schema = schema();
    let (_, plain, _) = json(&["euler", "--density", "x", "--weights", "1,1"]);
    assert!(plain.get("timing_ms").is_none());
    let (_, timed, _) = json(&["--timing", "euler", "--density", "x", "--weights", "1,1"]);
    assert!(timed["timing_ms"].as_f64().unwrap() >= 0.0);
    assert_valid(&schema, &timed);
}

#[test]
fn identical_invocations_print_identical_json() {
    let args = ["moduli", "--map", "x^3+y^4", "--group", "K", "--side", "source", "--kmax", "6", "--route", "both"];
    let (_, _, a) = json(&args);
    let (_, _, b) = json(&args);
    assert_eq!(a, b);
    let (_, _, a) = json(&["atlas", "verify", "--table", "class_n2", "--threads", "4"]);
    let (_, _, b) = json(&["atlas", "verify", "--table", "class_n2", "--threads", "1"]);
    assert_eq!(a, b);
}

#[test]
fn text_and_json_agree_on_numbers() {
    let args = ["moduli", "--map", "x, y^2", "--group", "C", "--side", "target", "--kmax", "6"];
    let text = String::from_utf8(run(&args).stdout).unwrap();
    let (_, v, _) = json(&args);
    for row in v["result"]["route_a"]["per_order"].as_array().unwrap() {
        let line = format!(
            "k={:<3} dim full {:<6} dim constrained {:<6} quotient_dim {}",
            row["k"].as_u64().unwrap(),
            row["dim_full"].as_u64().unwrap(),
            row["dim_constrained"].as_u64().unwrap(),
            row["quotient_dim"].as_u64().unwrap()
        );
        assert!(text.contains(&line), "missing {line:?} in\n{text}");
    }

    let args = ["invariants", "--map", "x^5+y^5+x^3*y^3", "--mu", "--tau", "--varchenko"];
    let text = String::from_utf8(run(&args).stdout).unwrap();
    let (_, v, _) = json(&args);
    assert_eq!(v["result"]["mu"]["value"], 16);
    assert_eq!(v["result"]["tau"]["value"], 15);
    assert_eq!(v["result"]["varchenko"]["value"], 1);
    for n in ["16", "15"] {
        assert!(text.contains(n), "{text}");
    }
}

#[test]
fn rationals_round_trip_as_pairs() {
    let (code, v, _) = json(&[
        "atlas", "instantiate", "--table", "k_examples", "--entry", "g-lambda", "--param", "lambda=1/2",
    ]);
    assert_eq!(code, 0);
    let p = &v["result"]["params"]["lambda"];
    assert_eq!(p["num"], 1);
    assert_eq!(p["den"], 2);
}

#[test]
fn syntax_errors_point_at_the_offset() {
    let out = run(&["wqh", "--map", "x, x*y +* y^5", "--group", "A", "--side", "target"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains('^'), "{err}");
    assert!(!err.contains("panicked"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["moduli", "--map", "x, y^2", "--group", "Q", "--side", "target"]).status.code(), Some(1));
    assert_eq!(run(&["atlas", "verify", "--table", "no_such_table"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn atlas_override_directory() {
    let dir = std::env::temp_dir().join(format!("germ-moduli-atlas-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(
        dir.join("tiny.toml"),
        r#"
id = "tiny"
title = "One stable germ"
provenance = "local smoke table"

[[entries]]
id = "cusp"
family = "cusp"
source = ["x", "y"]
target = ["y1", "y2"]
components = ["x", "x*y + y^3"]
provenance = "stable cusp"
expect = [
  { op = "moduli", group = "A", side = "target", value = 0 },
  { op = "wqh", group = "A", side = "target", present = true },
]
"#,
    )
    .unwrap();
    let out = bin().env("GERM_MODULI_ATLAS", &dir).args(["atlas", "list"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("tiny"), "{text}");
    assert!(!text.contains("class_n2"), "{text}");
    let out = bin()
        .env("GERM_MODULI_ATLAS", &dir)
        .args(["--format", "json", "atlas", "verify", "--table", "tiny"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"][0]["passed"], 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn failing_atlas_expectation_exits_two() {
    let dir = std::env::temp_dir().join(format!("germ-moduli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("wrong.toml");
    std::fs::write(
        &file,
        r#"
id = "wrong"
title = "Deliberately wrong"
provenance = "negative control"

[[entries]]
id = "fold"
family = "fold"
source = ["x", "y"]
target = ["y1", "y2"]
components = ["x", "y^2"]
provenance = "fold with a wrong expectation"
expect = [{ op = "moduli", group = "C", side = "target", kmax = 6, value = 3 }]
"#,
    )
    .unwrap();
    let out = run(&["atlas", "verify", "--table", "wrong", "--path", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}
