use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    report: Value,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_iwalab")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(stdout.trim()).unwrap_or(Value::Null);
    Run { code: out.status.code().unwrap(), stdout, report }
}

fn file(dir: &TempDir, name: &str, text: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn prepare_reports_invariants() {
    let dir = TempDir::new().unwrap();
    let r = run(&["prepare", &file(&dir, "a.json", "[3, 1]")]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["mu"], 0);
    assert_eq!(r.report["results"]["lambda"], 1);
    assert_eq!(r.report["results"]["distinguished"], serde_json::json!([3, 1]));

    let r = run(&["prepare", &file(&dir, "b.json", "[9]")]);
    assert_eq!((r.report["results"]["mu"].as_u64(), r.report["results"]["lambda"].as_u64()), (Some(2), Some(0)));
}

#[test]
fn malformed_input_is_a_schema_error() {
    let dir = TempDir::new().unwrap();
    let r = run(&["prepare", &file(&dir, "bad.json", "{\n \"coefficients\": [1,\n")]);
    assert_eq!(r.code, 2);
    let msg = r.report["errors"][0].as_str().unwrap();
    assert!(msg.contains("line"), "{msg}");
}

#[test]
fn module_routes_cross_check() {
    let dir = TempDir::new().unwrap();
    let m = file(&dir, "m.json", r#"{"generators": 1, "relations": [[[3, 1]]]}"#);
    let r = run(&["module", &m, "--method", "both"]);
    assert_eq!(r.code, 0);
    let res = &r.report["results"]["module"];
    assert_eq!(res["crossCheck"], "pass");
    for route in ["determinant", "growth"] {
        assert_eq!((res[route]["lambda"].as_u64(), res[route]["mu"].as_u64()), (Some(1), Some(0)));
    }

    let r = run(&["module", &file(&dir, "p.json", r#"{"generators": 1, "relations": [[[3]]]}"#)]);
    let det = &r.report["results"]["module"]["determinant"];
    assert_eq!((det["lambda"].as_u64(), det["mu"].as_u64()), (Some(0), Some(1)));

    let ns = file(&dir, "ns.json", r#"{"generators": 2, "relations": [[[1], [0], [1]], [[0], [1], [1]]]}"#);
    let r = run(&["module", &ns, "--method", "determinant"]);
    assert_eq!(r.code, 1);
    assert!(r.report["errors"][0].as_str().unwrap().contains("not square"));
}

#[test]
fn group_ring_module_reports_identity() {
    let dir = TempDir::new().unwrap();
    let m = file(&dir, "g.json", r#"{"group": "Z/3", "generators": 1, "relations": [[[[-1, -1], [1], []]]]}"#);
    let r = run(&["module", &m]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["identityHolds"], true);
    assert_eq!(r.report["results"]["module"]["determinant"]["lambda"], 3);
}

#[test]
fn complex_anchor() {
    let dir = TempDir::new().unwrap();
    let c = file(
        &dir,
        "c.json",
        r#"{"group": "Z/3", "minDegree": 0, "ranks": [1, 1], "boundaries": [[[[[-1, -1], [1], [0]]]]]}"#,
    );
    let r = run(&["complex", &c]);
    assert_eq!(r.code, 0);
    let k = &r.report["results"]["kida"];
    assert_eq!((k["lambdaC"].as_i64(), k["lambdaCbar"].as_i64()), (Some(-3), Some(-1)));
    assert_eq!(k["identityHolds"], true);
}

#[test]
fn verify_kida_batches() {
    let r = run(&["verify-kida", "--groups", "Z/3", "--families", "mu-zero", "--seeds", "0..200"]);
    assert_eq!(r.code, 0);
    let t = &r.report["results"]["byGroup"]["Z/3"]["mu-zero"];
    assert_eq!(t["trials"], 200);
    assert_eq!(t["violations"].as_array().unwrap().len(), 0);
    assert_eq!(t["identityHolds"], 200);
    assert_eq!(r.report["seedRange"], serde_json::json!([0, 200]));

    let r = run(&["verify-kida", "--families", "mu-positive", "--trials", "60"]);
    let t = &r.report["results"]["byGroup"]["Z/3"]["mu-positive"];
    assert_eq!(t["consistentNonMuZero"], 60);
    assert_eq!(t["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn reports_are_byte_deterministic() {
    let args = ["verify-kida", "--groups", "Z/3,Z/9", "--families", "mu-zero,unconstrained", "--trials", "40"];
    let a = run(&[&args[..], &["--jobs", "1"]].concat());
    let b = run(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[&args[..], &["--seed", "5"]].concat());
    assert_ne!(a.report["inputsDigest"], c.report["inputsDigest"]);
}

#[test]
fn formulas_dispatch() {
    let dir = TempDir::new().unwrap();
    let kc =
        r#"{ "formula": "kida-classical", "degree": 3, "delta": 1, "lambdaBase": 2, "primes": [{"e":3, "count":2}] }"#;
    let r = run(&["formula", &file(&dir, "k.json", kc)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["lambdaTop"], 8);

    let eo = r#"{"formula": "elliptic-ordinary", "degree": 3, "lambdaBase": 2, "primes": [{"e": 3, "label": "good"}]}"#;
    assert_eq!(run(&["formula", &file(&dir, "e.json", eo)]).report["results"]["lambdaTop"], 10);

    let r = run(&["formula", &file(&dir, "u.json", r#"{"formula": "kida-modern", "degree": 3}"#)]);
    assert_eq!(r.code, 2);
    let msg = r.report["errors"][0].as_str().unwrap();
    assert!(msg.contains("kida-classical") && msg.contains("lie-rank"), "{msg}");
}

#[test]
fn report_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let r = run(&["prepare", &file(&dir, "a.json", "[3, 1]"), "--output", out.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(out).unwrap(), r.stdout);
}
