use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hvkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hvkit"))
        .args(args)
        .output()
        .expect("spawn hvkit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("hvkit-cli-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

#[test]
fn every_demo_exits_zero() {
    for name in ["toy", "segregate", "mix", "pbr", "additivity"] {
        let o = hvkit(&["demo", name]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(stdout(&o).contains("0 failed; exit status 0"));
    }
}

#[test]
fn demos_are_byte_identical_across_runs() {
    for name in ["pbr", "mix"] {
        let a = hvkit(&["demo", name, "--format", "structured"]);
        let b = hvkit(&["demo", name, "--format", "structured"]);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn pbr_demo_has_all_three_verdicts() {
    let s = stdout(&hvkit(&["pbr", "demo"]));
    for kind in [
        "CONTRADICTION",
        "CONSISTENT_STATE_DEPENDENT",
        "INEFFICIENCY",
    ] {
        assert!(s.contains(&format!("lemma/{kind}")), "{kind} missing");
    }
    assert!(s.contains("no_show=0.4375"));
}

#[test]
fn additivity_demo_prints_the_mismatch_line() {
    let s = stdout(&hvkit(&["demo", "additivity"]));
    assert!(s.contains("sum of values 0, value of sum 1"));
}

#[test]
fn structured_and_csv_formats() {
    let s = stdout(&hvkit(&["demo", "toy", "--format", "structured"]));
    assert!(s.contains("\"verdict\":\"pass\""));
    assert!(s.contains("\"schema_version\":1"));
    let c = stdout(&hvkit(&["demo", "toy", "--format", "csv"]));
    let lines: Vec<_> = c.lines().collect();
    assert_eq!(lines[0], "name,verdict,residual,values,detail");
    assert_eq!(lines.len(), 1 + 19);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(hvkit(&["demo", "bogus"]).status.code(), Some(2));
    assert_eq!(
        hvkit(&["demo", "toy", "--format", "yaml"]).status.code(),
        Some(2)
    );
    assert_eq!(
        hvkit(&["check", "/nonexistent/model.json"]).status.code(),
        Some(2)
    );
}

const WRONG_Z: &str = r#"{
  "space": {"label": "unit", "cells": [{"id": "lo", "measure": 0.5}, {"id": "hi", "measure": 0.5}]},
  "states": {"zero": [[1.0, 0.0], [0.0, 0.0]]},
  "observables": {"Z": {"outcomes": ["+1", "-1"], "basis": [[[1,0],[0,0]], [[0,0],[1,0]]]}},
  "densities": {"zero": {"lo": 1.0, "hi": 1.0}},
  "responses": [{"observable": "Z", "state_tag": "zero", "rows": {"lo": [0.0, 1.0], "hi": [0.0, 1.0]}}]
}"#;

/// Overlap fixture with q = 0.5: `zero` on A and AB, `plus` on AB and B.
const OVERLAP: &str = r#"{
  "space": {"label": "q", "cells": [{"id": "A", "measure": 0.25}, {"id": "AB", "measure": 0.5}, {"id": "B", "measure": 0.25}]},
  "states": {
    "zero": [[1.0, 0.0], [0.0, 0.0]],
    "plus": [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]]
  },
  "observables": {},
  "densities": {"zero": {"A": 2.0, "AB": 1.0}, "plus": {"AB": 1.0, "B": 2.0}},
  "responses": []
}"#;

#[test]
fn failing_report_exits_one_and_says_so() {
    let dir = Scratch::new("failing");
    let path = dir.path("wrong.json");
    fs::write(&path, WRONG_Z).unwrap();
    let o = hvkit(&["check", &path]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("[FAIL] born[zero,Z,{+1}]"), "{s}");
    assert!(s.trim_end().ends_with("exit status 1"));
}

#[test]
fn negative_tolerance_is_rejected() {
    assert_eq!(
        hvkit(&["demo", "toy", "--tolerance=-1"]).status.code(),
        Some(2)
    );
}

#[test]
fn report_goes_to_out_file() {
    let dir = Scratch::new("out");
    let out = dir.path("report.json");
    let o = hvkit(&["demo", "toy", "--format", "structured", "--out", &out]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(&out)
        .unwrap()
        .contains("\"command\":\"demo toy\""));
}

#[test]
fn export_transform_and_audit_round_trip() {
    let dir = Scratch::new("roundtrip");
    let toy = dir.path("toy.json");
    let seg = dir.path("seg.json");
    let mixed = dir.path("mixed.json");
    assert!(hvkit(&["demo", "toy", "--export", &toy]).status.success());

    let check = stdout(&hvkit(&["check", &toy]));
    assert!(check.contains("(mixed, state-dependent, deterministic)"));

    let o = hvkit(&["transform", "segregate", "--in", &toy, "--out", &seg]);
    assert!(stdout(&o).contains("(segregated, state-dependent, deterministic)"));
    let o = hvkit(&["transform", "mix", "--in", &seg, "--out", &mixed]);
    assert!(o.status.success());

    let o = hvkit(&[
        "audit",
        "equivalence",
        "--a",
        &toy,
        "--b",
        &mixed,
        "--suite",
        "full",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("[PASS] max-delta"));
}

#[test]
fn transform_without_out_is_a_usage_error() {
    let dir = Scratch::new("noout");
    let toy = dir.path("toy.json");
    hvkit(&["demo", "toy", "--export", &toy]);
    assert_eq!(
        hvkit(&["transform", "mix", "--in", &toy]).status.code(),
        Some(2)
    );
}

#[test]
fn invalid_model_names_state() {
    let dir = Scratch::new("invalid");
    let toy = dir.path("toy.json");
    hvkit(&["demo", "toy", "--export", &toy]);
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&toy).unwrap()).unwrap();
    for w in v["densities"]["plus"].as_object_mut().unwrap().values_mut() {
        *w = Value::from(w.as_f64().unwrap() * 0.9);
    }
    let bad = dir.path("bad.json");
    fs::write(&bad, v.to_string()).unwrap();
    let o = hvkit(&["check", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("plus"), "{err}");
}

#[test]
fn compose_rules_and_prism() {
    let dir = Scratch::new("compose");
    let toy = dir.path("toy.json");
    hvkit(&["demo", "toy", "--export", &toy]);
    for rule in ["independent", "compatible", "compact-native"] {
        let out = dir.path(&format!("{rule}.json"));
        let o = hvkit(&[
            "compose",
            "--rule",
            rule,
            "--component",
            &toy,
            "--pair",
            "zero,plus",
            "--L",
            "2",
            "--out",
            &out,
        ]);
        assert!(o.status.success(), "{rule}: {}", stdout(&o));
        assert!(Path::new(&out).exists());
    }
    let cn = stdout(&hvkit(&[
        "compose",
        "--rule",
        "compact-native",
        "--component",
        &toy,
        "--pair",
        "zero,plus",
        "--out",
        &dir.path("cn2.json"),
    ]));
    assert!(cn.contains("compatible=false"));

    let meas = dir.path("meas.json");
    let pbr = dir.path("pbr.json");
    hvkit(&["demo", "pbr", "--export", &pbr]);
    let composite: Value = serde_json::from_str(&fs::read_to_string(&pbr).unwrap()).unwrap();
    fs::write(&meas, composite["model"]["observables"]["M"].to_string()).unwrap();
    let prism = dir.path("prism.json");
    let prism_args = |component: &str| {
        let mut a = vec![
            "compose",
            "prism",
            "--component",
            component,
            "--pair",
            "zero,plus",
        ];
        a.extend(["--L", "2", "--measurement", &meas, "--out", &prism]);
        a.into_iter().map(String::from).collect::<Vec<_>>()
    };
    let run = |args: Vec<String>| {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        hvkit(&refs)
    };

    // Every toy cell is charged by both states, so nothing is ever detected.
    let o = run(prism_args(&toy));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-show"));

    let overlap = dir.path("overlap.json");
    fs::write(&overlap, OVERLAP).unwrap();
    let o = run(prism_args(&overlap));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("common_support_measure=0.25"));

    let o = hvkit(&[
        "compose",
        "prism",
        "--component",
        &overlap,
        "--pair",
        "zero,plus",
        "--out",
        &prism,
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pbr_verify_and_additivity_from_files() {
    let dir = Scratch::new("pbr");
    let scenario = dir.path("scenario.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    fs::write(
        &scenario,
        format!(
            r#"{{"psi1": [[1,0],[0,0]], "psi2": [[{h},0],[{h},0]], "L": 2, "canonical-basis": true}}"#
        ),
    )
    .unwrap();
    let o = hvkit(&["pbr", "verify", "--scenario", &scenario]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("scenario/antidistinguishing[4]"));

    let composite = dir.path("forced.json");
    hvkit(&["demo", "additivity", "--export", &composite]);
    let o = hvkit(&[
        "pbr",
        "additivity",
        "--composite",
        &composite,
        "--cell",
        "AB⊗AB",
        "--scenario",
        &scenario,
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("projector_values=[0,0,0,0]"));
}

#[test]
fn property_suite_is_seeded() {
    let a = hvkit(&["props", "--seed", "7", "--count", "100"]);
    let b = hvkit(&["props", "--seed", "7", "--count", "100"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
