use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_supertorsion"));
    c.env_remove("SUPERTORSION_CORPUS");
    c
}

fn corpus_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/corpus/{name}.json"))
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn circle_torsion_matches_the_golden_report() {
    let out = bin().args(["torsion", "circle_lambda_3", "--checks=duality,mu"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/circle_lambda_3.json")).unwrap();
    assert_eq!(out.stdout, golden);
    assert_eq!(json(&out)["tau_squared"], "3/4");
}

#[test]
fn reports_are_bit_identical_across_runs() {
    let path = corpus_file("s3_higher");
    let run = || bin().args(["torsion", path.to_str().unwrap()]).output().unwrap().stdout;
    assert_eq!(run(), run());
}

#[test]
fn fiberwise_acyclic_sphere_has_unit_torsion() {
    let out = bin().args(["torsion", "s3_fiberwise_acyclic"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["tau_squared"], "1");
}

#[test]
fn refusals_carry_stable_codes() {
    let cases = [
        (vec!["torsion", "s2_trivial"], 1, "OddDimensionRequired"),
        (vec!["torsion", "rp2_trivial"], 1, "NotOrientable"),
        (vec!["torsion", "circle_broken"], 1, "Violation"),
        (vec!["torsion", "no_such_job"], 2, "FileNotFound"),
        (vec!["torsion", "circle_lambda_3", "--checks=bogus"], 2, "UnknownCheck"),
    ];
    for (args, exit, code) in cases {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(exit), "{args:?}");
        assert_eq!(json(&out)["error"]["code"], code, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn validate_exit_codes() {
    let ok = bin().args(["validate", "circle_lambda_3"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let broken = bin().args(["validate", "circle_broken"]).output().unwrap();
    assert_eq!(broken.status.code(), Some(1));
    assert_eq!(json(&broken)["problems"][0]["code"], "Violation");
}

#[test]
fn parse_errors_report_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"complex\": [[0, 1]],\n \"representation\": ").unwrap();
    let out = bin().args(["validate", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["error"]["code"], "ParseError");
    assert!(v["error"]["message"].as_str().unwrap().contains("line 2"));
}

#[test]
fn cohomology_of_the_trivial_circle() {
    let out = bin().args(["cohomology", "circle_trivial"]).output().unwrap();
    let v = json(&out);
    assert_eq!((v["h_even"].as_u64(), v["h_odd"].as_u64()), (Some(1), Some(1)));
}

#[test]
fn corpus_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(corpus_file("circle_lambda_5"), dir.path().join("only.json")).unwrap();
    let out = bin()
        .env("SUPERTORSION_CORPUS", dir.path())
        .args(["torsion", "only"])
        .output()
        .unwrap();
    assert_eq!(json(&out)["tau_squared"], "5/16");
    let st = bin().env("SUPERTORSION_CORPUS", dir.path()).arg("selftest").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert_eq!(json(&st)["inputs"], 1);
}

#[test]
fn injected_sign_error_fails_the_selftest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(corpus_file("s3_trivial"), dir.path().join("s3_trivial.json")).unwrap();
    let clean = bin().args(["selftest", "--corpus"]).arg(dir.path()).output().unwrap();
    assert_eq!(clean.status.code(), Some(0));
    let out = bin()
        .args(["selftest", "--inject-sign-error", "--corpus"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let failures = json(&out)["failures"].to_string();
    assert!(failures.contains("skew-adjointness"), "{failures}");
}
