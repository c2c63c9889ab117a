use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

fn quantity<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == name)
        .unwrap_or_else(|| panic!("no {name} row"))
}

#[test]
fn exact_half_disk_capacity_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "hd.json",
        r#"{"space":"halfplane","shapes":[{"type":"halfdisk","c":0,"r":1}]}"#,
    );
    let out = hcap(&["capacity", &f, "--exact"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["schema"], "capacity-report/1");
    assert_eq!(quantity(&r, "hcap")["value"], 1.0);
    assert!(quantity(&r, "hcap").get("std_error").is_none());
    assert_eq!(r["digest"].as_str().unwrap().len(), 64);
    assert!(r["envelope"]["wall_time"].is_number());
}

#[test]
fn ring_capacity_estimate_matches_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "ring.json",
        r#"{"space":"disk","shapes":[{"type":"arcbox","theta0":0,"theta1":6.283185307179586,"rho":0.7}]}"#,
    );
    let out = hcap(&["capacity", &f, "--walks", "20000", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    let d = quantity(&r, "dcap");
    let (v, s) = (d["value"].as_f64().unwrap(), d["std_error"].as_f64().unwrap());
    assert!((v - 0.356675).abs() <= (4.0 * s).max(2e-4), "{v} ± {s}");
    assert_eq!(r["manifest"]["config"]["n_walks"], 20000);
    assert_eq!(r["manifest"]["config"]["seed"], 3);
}

#[test]
fn same_command_gives_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "two.json",
        r#"{"space":"halfplane","shapes":[{"type":"vslit","x":0,"h":1},{"type":"vslit","x":3,"h":0.5}]}"#,
    );
    let args = ["capacity", f.as_str(), "--walks", "3000", "--seed", "11", "--tol-area", "0.01"];
    let a = json(&hcap(&args));
    let b = json(&hcap(&args));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["digest"], b["digest"]);
    assert_eq!(a["manifest"], b["manifest"]);
}

#[test]
fn csv_has_a_row_per_result() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "hd.json",
        r#"{"space":"halfplane","shapes":[{"type":"halfdisk","c":0,"r":1}]}"#,
    );
    let jo = json(&hcap(&["capacity", &f, "--exact", "--tol-area", "0.01"]));
    let out = hcap(&["capacity", &f, "--exact", "--tol-area", "0.01", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("claim,quantity,case,value"));
    assert_eq!(lines.len() - 1, jo["results"].as_array().unwrap().len());
    assert!(lines.iter().any(|l| l.starts_with(",hcap,,1,")));
}

#[test]
fn malformed_file_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "bad.json",
        r#"{"space":"halfplane","shapes":[{"type":"vslit","x":0,"height":1}]}"#,
    );
    let out = hcap(&["capacity", &f]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("height"), "{err}");

    let f = write(
        dir.path(),
        "neg.json",
        r#"{"space":"halfplane","shapes":[{"type":"vslit","x":0,"h":-1}]}"#,
    );
    let out = hcap(&["capacity", &f]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape 0"));
}

#[test]
fn exact_mode_rejects_general_sets() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "two.json",
        r#"{"space":"halfplane","shapes":[{"type":"vslit","x":0,"h":1},{"type":"vslit","x":3,"h":1}]}"#,
    );
    assert_eq!(hcap(&["capacity", &f, "--exact"]).status.code(), Some(2));
}

#[test]
fn corpus_count_zero_writes_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("c");
    let out = hcap(&["corpus", "--kind", "staircase", "--count", "0", "--seed", "1", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let m: Value = serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["files"].as_array().unwrap().len(), 0);
    assert_eq!(m["count"], 0);
}

#[test]
fn corpus_digests_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let d = dir.path().join(name);
        let out = hcap(&["corpus", "--kind", "slit-forest", "--count", "10", "--seed", "1", "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
        let m: Value = serde_json::from_slice(&std::fs::read(d.join("manifest.json")).unwrap()).unwrap();
        m["files"].clone()
    };
    let a = run("a");
    assert_eq!(a.as_array().unwrap().len(), 10);
    assert_eq!(a, run("b"));
}

#[test]
fn radial_slit_corpus_files_pass_validation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("r");
    let out = hcap(&["corpus", "--kind", "radial-slit-set", "--count", "4", "--seed", "2", "--out", d.to_str().unwrap()]);
    assert!(out.status.success());
    for j in 0..4 {
        let text = std::fs::read_to_string(d.join(format!("radial-slit-set-{j:04}.json"))).unwrap();
        let f = hcap_core::ShapeFile::parse(&text).unwrap();
        assert_eq!(f.space, hcap_core::Space::Disk);
        f.into_set().unwrap();
    }
}

#[test]
fn corpus_rejects_unknown_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let out = hcap(&["corpus", "--kind", "spiral", "--count", "1", "--seed", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_needs_a_seed_and_a_known_claim() {
    assert_eq!(hcap(&["verify", "t1"]).status.code(), Some(2));
    assert_eq!(hcap(&["verify", "t9", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn verify_corollary_tabulates_the_heights() {
    let out = hcap(&["verify", "corollary", "--seed", "5", "--walks", "20000", "--y", "8,16,32"]);
    let code = out.status.code();
    assert!(matches!(code, Some(0) | Some(1)), "{code:?}");
    let r = json(&out);
    let rows = r["results"].as_array().unwrap();
    for case in ["halfdisk(0,1)/y=8", "halfdisk(0,1)/y=16", "halfdisk(0,1)/y=32"] {
        assert!(
            rows.iter().any(|x| x["claim"] == "corollary.ratio" && x["case"] == case),
            "missing {case}"
        );
    }
    assert_eq!(r["manifest"]["config"]["y_list"], serde_json::json!([8.0, 16.0, 32.0]));
    assert_eq!(r["manifest"]["claims"], serde_json::json!(["corollary"]));
}

#[test]
fn verify_hcap_crad_passes() {
    let out = hcap(&["verify", "hcap-crad", "--seed", "5", "--walks", "20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["manifest"]["summary"]["hcap-crad"]["fail"], 0);
}
