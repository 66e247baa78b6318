use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hitchin::atlas::LiftAtlas;
use hitchin::fixtures;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hitchin")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

/// Writes the fixture's lamination and atlas into `dir`.
fn surface_files(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    let [lam, atlas, _, _] = fixtures::sources(name).unwrap();
    let (l, a) = (dir.join("lam.json"), dir.join("atlas.json"));
    fs::write(&l, lam).unwrap();
    fs::write(&a, atlas).unwrap();
    (l, a)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fuchsian_lift_has_trivial_triangle_invariants() {
    let o = run(&["invariants", "--fixture", "pants", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    for vals in v["triangles"].as_object().unwrap().values() {
        for x in vals.as_object().unwrap().values() {
            assert_eq!(x, "1");
        }
    }
    assert_eq!(v["log"]["precision"], 256);
}

#[test]
fn rotation_is_not_loxodromic() {
    let dir = TempDir::new().unwrap();
    let rep = r#"{"n": 2, "generators": {
        "x1": [["0", "-1"], ["1", "0"]], "x2": [["0", "-1"], ["1", "0"]],
        "x3": [["0", "-1"], ["1", "0"]], "x4": [["0", "-1"], ["1", "0"]]}}"#;
    let p = dir.path().join("rep.json");
    fs::write(&p, rep).unwrap();
    let o = run(&["invariants", "--fixture", "single-leaf", "--rep", s(&p)]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["error"], "NotLoxodromic");
}

#[test]
fn truncated_json_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("rep.json");
    fs::write(&p, r#"{"n": 2, "generators": {"x1": [["1""#).unwrap();
    let o = run(&["invariants", "--fixture", "pants", "--rep", s(&p)]);
    assert_eq!(code(&o), 1);
    assert_eq!(stderr_json(&o)["error"], "MalformedInput");
}

#[test]
fn exact_mode_rejects_decimals() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("c.json");
    let o = run(&["sample", "--fixture", "pants", "--n", "2", "--out", s(&p)]);
    assert_eq!(code(&o), 0);
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    // `g0` is an infinite leaf, so its shear enters the closed leaf equalities.
    v["shears"]["g0"][0] = Value::String("12345.5".into());
    fs::write(&p, v.to_string()).unwrap();
    let o = run(&["--exact", "check-polytope", "--fixture", "pants", "--coords", s(&p)]);
    assert_eq!(code(&o), 1);
    assert_eq!(stderr_json(&o)["error"], "NotExact");
    // Without --exact the decimal is accepted and simply breaks an equality.
    let o = run(&["check-polytope", "--fixture", "pants", "--coords", s(&p)]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["pass"], false);
}

#[test]
fn check_polytope_reports_dimension() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("c.json");
    assert_eq!(code(&run(&["--seed", "3", "sample", "--fixture", "single-leaf", "--n", "4", "--out", s(&p)])), 0);
    let o = run(&["check-polytope", "--fixture", "single-leaf", "--coords", s(&p)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["dimension"]["dimension"], 30);
}

#[test]
fn reconstruct_then_invariants_returns_the_sample() {
    let dir = TempDir::new().unwrap();
    let (l, a) = surface_files(dir.path(), "single-leaf");
    let c = dir.path().join("c.json");
    let r = dir.path().join("r.json");
    let surf = ["--lamination", s(&l), "--atlas", s(&a)];
    let mut args = vec!["--exact", "sample", "--n", "3", "--out", s(&c)];
    args.extend(surf);
    assert_eq!(code(&run(&args)), 0);
    let mut args = vec!["--exact", "reconstruct", "--coords", s(&c), "--out", s(&r)];
    args.extend(surf);
    assert_eq!(code(&run(&args)), 0);
    let mut args = vec!["--exact", "invariants", "--rep", s(&r)];
    args.extend(surf);
    let o = run(&args);
    assert_eq!(code(&o), 0);
    let back = stdout_json(&o);
    let input: Value = serde_json::from_str(&fs::read_to_string(&c).unwrap()).unwrap();
    assert_eq!(back["triangles"], input["triangles"]);
    assert_eq!(back["shears"], input["shears"]);
}

#[test]
fn roundtrip_is_exact() {
    let o = run(&["--exact", "--seed", "7", "roundtrip", "--fixture", "pants", "--n", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["max_deviation"], "0");
    let o = run(&["--exact", "roundtrip", "--fixture", "single-leaf", "--n", "2", "--samples", "3"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn scrambled_atlas_is_inconsistent() {
    let dir = TempDir::new().unwrap();
    let (l, a) = surface_files(dir.path(), "pants");
    let mut atlas: LiftAtlas = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    let p1 = atlas.generator_paths["x1"].clone();
    let p3 = atlas.generator_paths["x3"].clone();
    atlas.generator_paths.insert("x1".into(), p3);
    atlas.generator_paths.insert("x3".into(), p1);
    fs::write(&a, serde_json::to_string(&atlas).unwrap()).unwrap();
    let o = run(&["roundtrip", "--lamination", s(&l), "--atlas", s(&a), "--n", "3", "--exact"]);
    assert_eq!(code(&o), 3);
    let kind = stderr_json(&o)["error"].as_str().unwrap().to_string();
    assert!(kind == "RelatorViolation" || kind == "BadPath", "{kind}");
}

#[test]
fn identities_verb() {
    let o = run(&["identities", "--n", "4", "--trials", "100"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!(v["failures"].as_array().unwrap().is_empty());
    let generic = 100 - v["skipped_degenerate"].as_u64().unwrap();
    assert!(generic > 50);
    assert_eq!(v["passed"]["quadruple ratio product"].as_u64().unwrap(), 3 * generic);

    let o = run(&["identities", "--n", "3", "--trials", "30", "--inject-degenerate", "5"]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["skipped_degenerate"].as_u64().unwrap() >= 6);

    let o = run(&["identities", "--n", "3", "--trials", "0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["passed"].as_object().unwrap().is_empty());
}

#[test]
fn relations_hold_on_fuchsian_and_fail_off_the_relation() {
    let o = run(&["relations", "--fixture", "pants", "--n", "4"]);
    assert_eq!(code(&o), 0);
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("c.json");
    assert_eq!(code(&run(&["sample", "--fixture", "pants", "--n", "3", "--out", s(&p)])), 0);
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    let t = v["triangles"].as_object().unwrap().keys().next().unwrap().clone();
    v["triangles"][&t]["1,1,1"] = Value::String("1000".into());
    fs::write(&p, v.to_string()).unwrap();
    let o = run(&["relations", "--fixture", "pants", "--coords", s(&p)]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn invalid_lamination_is_reported() {
    let dir = TempDir::new().unwrap();
    let (l, _) = surface_files(dir.path(), "pants");
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&l).unwrap()).unwrap();
    v["triangles"].as_array_mut().unwrap().pop();
    fs::write(&l, v.to_string()).unwrap();
    let o = run(&["validate-lamination", s(&l)]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout_json(&o)["valid"], false);
}

#[test]
fn reports_are_deterministic() {
    for args in [
        vec!["--seed", "5", "sample", "--fixture", "pants", "--n", "3"],
        vec!["--seed", "2", "identities", "--n", "3", "--trials", "10"],
        vec!["--seed", "1", "roundtrip", "--fixture", "single-leaf", "--n", "2"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
