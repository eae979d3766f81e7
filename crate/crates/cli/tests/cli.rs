use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monoconv")).current_dir(fixtures()).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("monoconv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Writes the report of `args` to a file and replays it with `--verify`.
fn verify_round_trip(name: &str, args: &[&str]) -> Value {
    let path = scratch(&format!("{name}.json"));
    let p = path.to_str().unwrap();
    let mut with_output = args.to_vec();
    with_output.extend(["--output", p]);
    assert_eq!(run(&with_output).status.code(), Some(0));
    let mut with_verify = args.to_vec();
    with_verify.extend(["--verify", p]);
    report(&with_verify)
}

const COMMANDS: &[(&str, &[&str])] = &[
    ("hull", &["hull", "--instance", "z2.json", "--set", "segment.json", "--strategy", "lattice"]),
    ("member", &["member", "--instance", "z6.json", "--set", "z6_set.json", "--point", "[3]"]),
    ("check", &["check", "--instance", "z1.json", "--function", "not_subadditive.json", "--class", "subadditive"]),
    (
        "check_convex",
        &["check", "--instance", "z1.json", "--function", "not_subadditive.json", "--class", "convex", "--bounds-terms", "2", "--bounds-coeff", "3"],
    ),
    ("probe", &["probe", "--instance", "dyadic.json", "--n", "3", "--window", r#"{"exp":0,"lo":[0],"hi":[2]}"#]),
    ("deriv", &["deriv", "--instance", "dyadic.json", "--function", "abs.json", "--x", r#"["0"]"#, "--h", r#"["1"]"#, "--schedule", "2,4,8"]),
    ("subdiff", &["subdiff", "--instance", "dyadic.json", "--function", "abs.json", "--x", r#"["0"]"#, "--probes", r#"[["1/8"],["-1/8"]]"#]),
    ("conjugate", &["conjugate", "--instance", "dyadic.json", "--function", "abs.json", "--phi", r#"["3/2"]"#, "--x", r#"["1"]"#]),
    ("duality", &["duality", "--problem", "abs_shift.json", "--schedule", "1,2,4"]),
    ("sandwich", &["sandwich", "--problem", "nonsep.json"]),
    ("extend", &["extend", "--instance", "dyadic.json", "--function", "sublinear.json", "--generators", r#"[[["1"],"1/2"]]"#, "--bounds-coeff", "4"]),
    ("value", &["value", "--problem", "ceiling.json", "--p", "2"]),
    ("lagrange", &["lagrange", "--problem", "quadratic.json"]),
    (
        "maxrule",
        &["maxrule", "--instance", "dyadic.json", "--function", "max_a.json", "--function", "max_b.json", "--x", r#"["0"]"#, "--probes", r#"[["1/8"],["-1/8"]]"#, "--schedule", "1,2"],
    ),
];

#[test]
fn lattice_hull_of_a_segment() {
    let r = report(&["hull", "--instance", "z2.json", "--set", "segment.json", "--strategy", "lattice"]);
    assert_eq!(r["command"], "hull");
    assert_eq!(r["verdict"]["hull"], serde_json::json!([[0, 0], [1, 1], [2, 2]]));
    assert_eq!(r["verdict"]["method"], "lattice_intersection");
    assert_eq!(r["truncation"], Value::Null);
}

#[test]
fn three_does_not_divide_one_in_the_dyadics() {
    let r = report(&["probe", "--instance", "dyadic.json", "--n", "3", "--window", r#"{"exp":0,"lo":[0],"hi":[2]}"#]);
    assert_eq!(r["verdict"]["probe"], "not_divisible");
    assert_eq!(r["certificates"][0]["y"], serde_json::json!(["1"]));
    let r = report(&["probe", "--instance", "dyadic.json", "--n", "2", "--window", r#"{"exp":1,"lo":[-4],"hi":[4]}"#]);
    assert_eq!(r["verdict"]["probe"], "divisible");
}

#[test]
fn non_separation_certificate() {
    let r = report(&["sandwich", "--problem", "nonsep.json"]);
    assert_eq!(r["verdict"]["outcome"], "infeasible_certificate");
    assert_eq!(r["verdict"]["c_upper"], "-3");
    assert_eq!(r["verdict"]["c_lower"], "3");
}

#[test]
fn value_and_lagrange_reports() {
    let r = report(&["value", "--problem", "ceiling.json", "--p", "2"]);
    let entries = r["certificates"]["entries"].as_array().unwrap();
    let v = |b: &str| entries.iter().find(|e| e["rhs"][0] == b).unwrap()["value"].clone();
    assert_eq!((v("5"), v("4"), v("2"), v("1")), ("-2".into(), "-2".into(), "-1".into(), "0".into()));
    assert_eq!(r["verdict"]["homogeneity"]["violation"]["law"], "homogeneity");
    assert!(r["verdict"]["homogeneity"]["hypothesis_failure"].is_string());
    assert_eq!(r["verdict"]["subadditivity"]["violation"], Value::Null);

    let r = report(&["lagrange", "--problem", "ceiling.json"]);
    assert_eq!((r["verdict"]["lambda"][0].as_str(), r["verdict"]["gap"].as_str()), (Some("1/2"), Some("1/2")));
    let r = report(&["lagrange", "--problem", "quadratic.json"]);
    assert_eq!((r["verdict"]["lambda"][0].as_str(), r["verdict"]["exact"].as_bool()), (Some("2"), Some(true)));
}

#[test]
fn analysis_reports() {
    let r = report(COMMANDS.iter().find(|c| c.0 == "deriv").unwrap().1);
    assert_eq!(r["verdict"]["infimum"], "1");
    let r = report(COMMANDS.iter().find(|c| c.0 == "subdiff").unwrap().1);
    assert_eq!(r["verdict"]["interval"], serde_json::json!(["-1", "1"]));
    let r = report(COMMANDS.iter().find(|c| c.0 == "duality").unwrap().1);
    assert_eq!((r["verdict"]["primal"].as_str(), r["verdict"]["dual"].as_str()), (Some("1"), Some("1")));
    assert_eq!(r["verdict"]["strong_duality"], true);
    let r = report(COMMANDS.iter().find(|c| c.0 == "maxrule").unwrap().1);
    assert_eq!(r["verdict"]["equality"], true);
    let r = report(COMMANDS.iter().find(|c| c.0 == "conjugate").unwrap().1);
    // |x| against 3/2 x on [-2, 2] peaks at x = 2
    assert_eq!(r["verdict"]["value"], "1");
    assert_eq!(r["verdict"]["fenchel_young"]["equality"], false);
}

#[test]
fn reports_are_deterministic() {
    for (name, args) in COMMANDS {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}

#[test]
fn every_report_verifies() {
    for (name, args) in COMMANDS {
        let v = verify_round_trip(name, args);
        assert_eq!(v["command"], format!("verify {}", args[0]));
        assert_eq!(v["verdict"]["verified"], true, "{name}: {}", v["verdict"]);
    }
}

#[test]
fn tampered_reports_fail_verification() {
    let path = scratch("tampered.json");
    let p = path.to_str().unwrap();
    assert_eq!(run(&["sandwich", "--problem", "nonsep.json", "--output", p]).status.code(), Some(0));
    let mut r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    r["certificates"]["farkas"][0] = "5".into();
    std::fs::write(&path, serde_json::to_string(&r).unwrap()).unwrap();
    let v = report(&["sandwich", "--problem", "nonsep.json", "--verify", p]);
    assert_eq!(v["verdict"]["verified"], false);
    let failed: Vec<&str> = v["verdict"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["ok"] == false)
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["certificate replays", "recomputed report matches"]);

    // a report for other inputs is rejected by the digest
    let window = r#"{"exp":0,"lo":[0],"hi":[2]}"#;
    assert_eq!(run(&["probe", "--instance", "dyadic.json", "--n", "3", "--window", window, "--output", p]).status.code(), Some(0));
    let v = report(&["probe", "--instance", "dyadic.json", "--n", "5", "--window", window, "--verify", p]);
    assert_eq!(v["verdict"]["verified"], false);
    assert_eq!(v["verdict"]["checks"][1]["ok"], false);
}

#[test]
fn exit_codes() {
    // usage: missing required flag, malformed JSON, unknown field, fixpoint without bounds
    assert_eq!(run(&["deriv", "--instance", "dyadic.json", "--function", "abs.json", "--x", "[\"0\"]", "--h", "[\"1\"]"]).status.code(), Some(1));
    assert_eq!(run(&["member", "--instance", "z6.json", "--set", "z6_set.json", "--point", "[3"]).status.code(), Some(1));
    assert_eq!(run(&["hull", "--instance", "z2.json", "--set", "z2.json"]).status.code(), Some(1));
    assert_eq!(run(&["hull", "--instance", "z2.json", "--set", "segment.json", "--strategy", "fixpoint"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    // preconditions surfaced from the library
    let off_domain = run(&["deriv", "--instance", "dyadic.json", "--function", "abs.json", "--x", "[\"5\"]", "--h", "[\"1\"]", "--schedule", "2"]);
    assert_eq!(off_domain.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&off_domain.stderr).contains("precondition"));
    let not_sublinear = run(&["extend", "--instance", "z1.json", "--function", "not_subadditive.json", "--generators", "[[[1],\"1\"]]", "--bounds-coeff", "2"]);
    assert_eq!(not_sublinear.status.code(), Some(2));
    // a failing class check is still a computed verdict
    assert_eq!(run(&["check", "--instance", "z1.json", "--function", "not_subadditive.json", "--class", "subadditive"]).status.code(), Some(0));
}
