use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn geomodel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geomodel")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn married_pipeline() {
    let married = data("married.dlg");
    let married = married.to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    for compact in [false, true] {
        let geo = dir.path().join(format!("eta-{compact}.json"));
        let geo = geo.to_str().unwrap();
        let mut args = vec!["embed", married, "-o", geo];
        if compact {
            args.push("--compact");
        }
        assert!(geomodel(&args).status.success());
        let eta: Value = serde_json::from_str(&fs::read_to_string(geo).unwrap()).unwrap();
        assert_eq!(eta["m"], if compact { 3 } else { 4 });

        let v = geomodel(&["verify", married, "--geometry", geo]);
        assert_eq!(v.status.code(), Some(0), "{}", stderr(&v));
        assert_eq!(stdout(&v).trim(), "phi == M: true");

        let c = geomodel(&["check-rules", married, "--geometry", geo]);
        assert_eq!(c.status.code(), Some(0), "{}", stdout(&c));
        assert_eq!(stdout(&c).matches("satisfied").count(), 3);
    }
}

#[test]
fn chase_output_is_the_married_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("model.json");
    let o = geomodel(&["chase", data("married.dlg").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let model: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let atoms = model["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 6);
    assert_eq!(atoms.iter().filter(|a| a["rel"] == "Married").count(), 2);
}

#[test]
fn verify_rejects_a_wrong_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let geo = dir.path().join("eta.json");
    let nonchained = data("nonchained.dlg");
    assert!(geomodel(&["embed", nonchained.to_str().unwrap(), "-o", geo.to_str().unwrap()]).status.success());
    let o = geomodel(&["verify", data("married.dlg").to_str().unwrap(), "--geometry", geo.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("phi == M: false"));
    assert!(stdout(&o).contains("missing: Wife(anna)"));
}

#[test]
fn nonchained_constraint_breaks_at_the_midpoint() {
    let o = geomodel(&["check-rules", data("nonchained.dlg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("VIOLATED at X = (1/2, 1/2), Y = (1/2, 1/2)"), "{}", stdout(&o));

    let q = geomodel(&["qc-check", "--json", data("nonchained.dlg").to_str().unwrap()]);
    assert_eq!(q.status.code(), Some(1));
    assert_eq!(json(&q)["quasi_chained"], false);
}

#[test]
fn probe_is_seeded_and_reports_violations() {
    let file = data("nonchained.dlg");
    let args = [
        "probe",
        file.to_str().unwrap(),
        "--sampler",
        "midpoint",
        "--trials",
        "4",
        "--points",
        "2",
        "--seed",
        "9",
        "--json",
    ];
    let a = geomodel(&args);
    let b = geomodel(&args);
    assert_eq!(a.status.code(), Some(1));
    assert!(stderr(&a).contains("seed: 9"));
    assert_eq!(a.stdout, b.stdout);
    let report = json(&a);
    assert_eq!(report["seed"], 9);
    let records = report["records"].as_array().unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r["satisfiable"] == false));

    let ok = geomodel(&["probe", data("married.dlg").to_str().unwrap(), "--trials", "5"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("0 unsatisfiable"));
}

#[test]
fn helly_breaks_low_dimensions_only() {
    let o = geomodel(&["helly", "--n", "5", "--dim", "3", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = json(&o);
    assert_eq!(doc["certificate"], "unsatisfiable");
    assert_eq!(doc["point"].as_array().unwrap().len(), 3);
    assert!(stderr(&o).contains("seed: 2"));

    // three points in general position in the plane: the three segments miss
    // a common point
    let mut found_gap = false;
    for seed in 0..10 {
        let o = geomodel(&["helly", "--n", "3", "--dim", "2", "--seed", &seed.to_string()]);
        match o.status.code() {
            Some(1) => {
                found_gap = true;
                assert_eq!(json(&o)["point"], Value::Null);
            }
            Some(0) => assert_eq!(json(&o)["certificate"], "unsatisfiable"),
            other => panic!("exit {other:?}"),
        }
    }
    assert!(found_gap);
}

#[test]
fn float_output_uses_numbers() {
    let o = geomodel(&["embed", data("married.dlg").to_str().unwrap(), "--float"]);
    assert!(o.status.success());
    let eta = json(&o);
    let first = eta["entities"].as_object().unwrap().values().next().unwrap();
    assert!(first[0].is_f64());
}

#[test]
fn exit_codes() {
    assert_eq!(geomodel(&["chase", "/definitely/not/here.dlg"]).status.code(), Some(2));
    assert_eq!(geomodel(&["frobnicate"]).status.code(), Some(2));
    let o = geomodel(&["chase", data("married.dlg").to_str().unwrap(), "--max-steps", "1"]);
    assert_eq!(o.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dlg");
    fs::write(&bad, "R(X) -> .").unwrap();
    assert_eq!(geomodel(&["parse", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn parse_prints_a_reparsable_program() {
    let o = geomodel(&["parse", data("married.dlg").to_str().unwrap()]);
    assert!(o.status.success());
    let dir = tempfile::tempdir().unwrap();
    let again = dir.path().join("again.dlg");
    fs::write(&again, stdout(&o)).unwrap();
    let p = geomodel(&["parse", again.to_str().unwrap()]);
    assert_eq!(stdout(&o), stdout(&p));

    let s = geomodel(&["parse", "--json", data("married.dlg").to_str().unwrap()]);
    let summary = json(&s);
    assert_eq!(summary["signature"]["Married"], 2);
    assert_eq!(summary["weakly_acyclic"], true);
}

#[test]
fn limits_commands() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair.json");
    fs::write(
        &pair,
        r#"{"r": {"m": [["2", "4"], ["0", "-2"]], "lambda": "3"}, "s": {"m": [["1", "2"], ["0", "-1"]], "lambda": "1"}}"#,
    )
    .unwrap();
    let o = geomodel(&["limits", "bilinear", pair.to_str().unwrap(), "--samples", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let d = json(&o);
    assert_eq!(d["verdict"], "satisfied");
    assert_eq!(d["alpha"], "2");
    assert_eq!(d["sampled"]["violation"], Value::Null);

    fs::write(
        &pair,
        r#"{"r": {"m": [["1", "0"], ["0", "1"]], "lambda": "1"}, "s": {"m": [["0", "1"], ["1", "0"]], "lambda": "1"}}"#,
    )
    .unwrap();
    let o = geomodel(&["limits", "bilinear", pair.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "counterexample");

    let simple = dir.path().join("simple.json");
    fs::write(
        &simple,
        r#"{"r": ["1", "-2"], "ri": ["2", "1"], "s": ["-1", "4"], "si": ["5", "1"], "t": ["1", "-3"], "ti": ["2", "2"],
            "lambdas": ["1", "1", "1", "1", "1", "1"]}"#,
    )
    .unwrap();
    let o = geomodel(&["limits", "simple", simple.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["outcome"], "counterexample");

    let o = geomodel(&["limits", "translation", "--husband", "0:2", "--wife", "1:1", "--married", "1:1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(1) lies between (0) and (2)"));
    let o = geomodel(&["limits", "translation", "--husband", "0:1", "--wife", "1:1", "--married", "1:1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = geomodel(&["limits", "translation", "--husband", "2:0", "--wife", "1:1", "--married", "1:1"]);
    assert_eq!(o.status.code(), Some(2));

    let triples = dir.path().join("g.txt");
    fs::write(&triples, "a R a\nb R b\na R b\nb R a\n").unwrap();
    let o = geomodel(&["limits", "graph-props", triples.to_str().unwrap(), "--subset", "a,b"]);
    assert_eq!(o.status.code(), Some(0));
    fs::write(&triples, "a R a\nb R b\na R b\n").unwrap();
    let o = geomodel(&["limits", "graph-props", triples.to_str().unwrap(), "--subset", "a,b"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)[0]["property"]["property"], "reflexive_not_symmetric");
}

#[test]
fn repeated_slice_has_no_convex_model() {
    let file = data("repeated_slice.dlg");
    let q = geomodel(&["qc-check", file.to_str().unwrap()]);
    assert_eq!(q.status.code(), Some(0));
    assert_eq!(geomodel(&["verify", file.to_str().unwrap()]).status.code(), Some(0));
    let o = geomodel(&["probe", file.to_str().unwrap(), "--sampler", "midpoint", "--trials", "1", "--points", "1"]);
    assert_eq!(o.status.code(), Some(1));
}
