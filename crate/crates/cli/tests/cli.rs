use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cocycle"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_scenario(name: &str, text: &str) -> PathBuf {
    let p = tmp(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

const SMALL: &str = r#"{
  "name": "small",
  "n": 2,
  "constants": { "c": { "re": { "num": "1", "den": "10" } } },
  "maps": { "h": "z2; z2^2 + c - z1", "h-inv": "z1^2 + c - z2; z1", "u": "z1 + z2^2/3; z2", "u-inv": "z1 - z2^2/3; z2" },
  "clouds": { "pool": { "random": { "center": [[0, 0], [0, 0]], "radius": 0.3, "count": 6, "seed": 3 } } },
  "cover": { "opens": [{ "name": "all", "kind": "all" }], "pool": "pool" },
  "action": { "generators": [{ "name": "h", "map": "h", "inverse": "h-inv" }] },
  "atlases": { "A": [{ "map": "u", "inverse": "u-inv" }] },
  "checks": [
    { "name": "closed", "type": "group_invariant", "atlas": "A", "invariant": { "kind": "todd", "k": 1 }, "tol": 1e-7 },
    { "name": "not-zero", "type": "group_invariant", "atlas": "A", "invariant": { "kind": "todd", "k": 1 }, "tol": 1e-7, "expect_zero": true },
    { "name": "bad-step", "type": "bm_dbar", "n": 2, "probes": 4, "step": 0.5, "radius": 1.0 },
    { "name": "todd2", "type": "symfun", "kind": "todd", "k": 2 }
  ]
}"#;

#[test]
fn shipped_scenarios_pass() {
    for name in ["affine_torus.scn", "henon_z.scn"] {
        let out = tmp(&format!("{name}.json"));
        let o = run(&["run", shipped(name).to_str().unwrap(), "-o", out.to_str().unwrap(), "-q"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let r = report(&out);
        assert_eq!(r["status"], "pass");
        assert_eq!(r["scenario_sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn affine_torus_tau_is_exactly_zero() {
    let out = tmp("affine_exact.json");
    run(&["run", shipped("affine_torus.scn").to_str().unwrap(), "-o", out.to_str().unwrap(), "-q"]);
    for c in report(&out)["checks"].as_array().unwrap() {
        assert_eq!(c["details"]["tau"]["max_residual"].as_f64(), Some(0.0));
        assert!(c["details"]["tau"]["keys"].as_u64().unwrap() > 0);
    }
}

#[test]
fn failures_and_errors_do_not_abort_the_batch() {
    let scn = write_scenario("small.scn", SMALL);
    let out = tmp("small.json");
    let o = run(&["run", scn.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    let statuses: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["status"].as_str().unwrap()).collect();
    // probes closer than 10 h to the base point are a domain error, not a failure
    assert_eq!(statuses, ["pass", "fail", "error", "pass"]);
    assert!(r["checks"][2]["details"]["error"].as_str().unwrap().contains("diagonal"));
}

#[test]
fn reports_are_deterministic_modulo_timing() {
    let scn = write_scenario("det.scn", SMALL);
    let (a, b) = (tmp("det-a.json"), tmp("det-b.json"));
    bin().args(["run", scn.to_str().unwrap(), "-o", a.to_str().unwrap(), "-q"]).env("COCYCLE_THREADS", "1").output().unwrap();
    bin().args(["--threads", "4", "run", scn.to_str().unwrap(), "-o", b.to_str().unwrap(), "-q"]).output().unwrap();
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(ra["timing"]["threads"], 1);
    assert_eq!(rb["timing"]["threads"], 4);
    assert_eq!(serde_json::to_string(&without_timing(ra)).unwrap(), serde_json::to_string(&without_timing(rb)).unwrap());
}

#[test]
fn undefined_names_are_validation_errors() {
    let cases = [
        (SMALL.replace(r#""map": "h","#, r#""map": "hh","#), "`hh`"),
        (SMALL.replace("z2^2 + c - z1", "z2^2 + cc - z1"), "cc"),
        (SMALL.replace(r#""pool": "pool""#, r#""pool": "nowhere""#), "`nowhere`"),
        (SMALL.replace(r#""atlas": "A""#, r#""atlas": "Z""#), "`Z`"),
    ];
    for (i, (text, symbol)) in cases.iter().enumerate() {
        let scn = write_scenario(&format!("undefined{i}.scn"), text);
        let o = run(&["run", scn.to_str().unwrap(), "-o", tmp("unused.json").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(symbol), "case {i}: {err}");
    }
}

#[test]
fn malformed_input_is_rejected_with_location() {
    let scn = write_scenario("broken.scn", "{\n  \"name\": \"x\",\n  \"n\": 2,\n  \"checks\": [\n}");
    let o = run(&["run", scn.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.scn:5:"));

    let negative = write_scenario("negative.scn", &SMALL.replace("\"tol\": 1e-7 },", "\"tol\": -1 },"));
    let o = run(&["run", negative.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerance must be positive"));

    let o = run(&["run", tmp("does-not-exist.scn").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn symfun_command() {
    let o = run(&["symfun", "todd", "2"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "(1/12)(S1^2 + S2) = (1/24)(3 T1^2 - T2)");
    let o = run(&["symfun", "chern", "3"]);
    assert!(String::from_utf8(o.stdout).unwrap().trim().ends_with("= (1/6) T3"));
    let o = run(&["symfun", "convert", "2"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "S1^2 - 2 S2 = T2");
    assert_eq!(run(&["symfun", "todd", "0"]).status.code(), Some(2));
    assert_eq!(run(&["symfun", "pontryagin", "2"]).status.code(), Some(2));
}

#[test]
fn bm_check_command() {
    let o = run(&["bm-check", "--n", "2", "--probes", "6", "--step", "1e-3", "--quad-order", "32", "--radius", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let ratio = v["dbar"]["ratio"].as_f64().unwrap();
    assert!((3.2..=4.8).contains(&ratio));
    assert!(v["reproducing"]["error"].as_f64().unwrap() <= 1e-3);
    let o = run(&["bm-check", "--n", "3", "--probes", "6"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn subset_commands_and_labels() {
    let henon = shipped("henon_z.scn");
    let out = tmp("subset.json");
    for (command, kind) in [("verify-cocycle", "telescoping"), ("group-invariant", "group_invariant"), ("witness", "witness")] {
        let o = run(&[command, henon.to_str().unwrap(), "-o", out.to_str().unwrap(), "-q"]);
        assert_eq!(o.status.code(), Some(0), "{command}");
        let r = report(&out);
        assert!(r["checks"].as_array().unwrap().iter().all(|c| c["type"] == kind));
    }
    let o = run(&["todd-cocycle", henon.to_str().unwrap(), "--simplex", "three-transitions", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dim"], 3);
    assert!(v["labels"].as_object().unwrap().contains_key("0,1,2"));
    let affine = shipped("affine_torus.scn");
    assert_eq!(run(&["witness", affine.to_str().unwrap(), "-o", out.to_str().unwrap()]).status.code(), Some(2));
}
