use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn latcoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latcoh")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, text: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const S45: &str = r#"{"branches": 1, "conductor": [12], "small_elements": [[0],[4],[5],[8],[9],[10],[12]]}"#;
const S457: &str = r#"{"branches": 1, "conductor": [7], "small_elements": [[0],[4],[5],[7]]}"#;
const WEDGE34: &str = r#"{"branches": 2, "conductor": [6,6], "small_elements": [[0,0],[3,3],[3,4],[3,6],[4,3],[4,4],[4,6],[6,3],[6,4],[6,6]]}"#;
const SMOOTH: &str = r#"{"branches": 1, "conductor": [0], "small_elements": [[0]]}"#;

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let good = latcoh(&["validate", &file(&dir, "a.json", S45)]);
    assert_eq!(good.status.code(), Some(0));
    assert!(stdout(&good).contains("verdict: pass"));

    let bad = file(&dir, "b.json", r#"{"branches": 2, "conductor": [2,2], "small_elements": [[0,0],[1,0],[2,2]]}"#);
    let out = latcoh(&["validate", &bad, "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "fail");
    let first = &report["violations"][0];
    assert_eq!(first["axiom"], "positivity");
    assert_eq!(first["witnesses"][0], serde_json::json!([1, 0]));

    let out = latcoh(&["validate", &file(&dir, "c.json", "{")]);
    assert_eq!(out.status.code(), Some(1));
    let out = latcoh(&["validate", &file(&dir, "d.json", r#"{"branches": 1, "conductor": [0]}"#)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("small_elements"));
}

#[test]
fn analyze_reports() {
    let dir = TempDir::new().unwrap();
    let report_path = dir.path().join("r.json");
    let out = latcoh(&["analyze", &file(&dir, "a.json", S45), "--report", report_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!((r["multiplicity"].as_i64(), r["delta"].as_i64()), (Some(4), Some(6)));
    assert_eq!(r["gorenstein"]["gorenstein"], true);
    assert_eq!(r["mf"]["verdict"], "holds");
    assert_eq!(r["nonpositivity"]["holds"], true);

    let out = latcoh(&["analyze", &file(&dir, "b.json", S457), "--report", "-"]);
    let r: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["mf"]["verdict"], "fails");
    assert_eq!(r["gorenstein"]["gorenstein"], false);

    let out = latcoh(&["analyze", &file(&dir, "w.json", WEDGE34), "--report", "-", "--max-q", "0"]);
    let r: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["mf"]["verdict"], "fails");
    let mut weights: Vec<i64> = r["local_minima"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["weight"].as_i64().unwrap())
        .filter(|&w| w != 0)
        .collect();
    weights.sort_unstable();
    assert_eq!(weights, vec![-4, -3, -3, -2]);
    assert!(r["module"]["reduced"].as_object().unwrap().keys().all(|k| k == "0"));

    let bad = file(&dir, "bad.json", r#"{"branches": 2, "conductor": [2,2], "small_elements": [[0,0],[1,0],[2,2]]}"#);
    assert_eq!(latcoh(&["analyze", &bad]).status.code(), Some(2));
}

#[test]
fn root_formats() {
    let dir = TempDir::new().unwrap();
    let s45 = file(&dir, "a.json", S45);
    let dot = stdout(&latcoh(&["root", &s45, "--format", "dot"]));
    assert_eq!(dot.matches("xlabel").count(), 7);
    assert!(dot.contains("stem"));
    assert_eq!(dot, stdout(&latcoh(&["root", &s45, "--format", "dot"])));
    let ascii = stdout(&latcoh(&["root", &file(&dir, "s.json", SMOOTH), "--format", "ascii"]));
    assert_eq!(ascii, "n >= 0: stem\n");
    let s456 = file(&dir, "c.json", r#"{"branches": 1, "conductor": [8], "small_elements": [[0],[4],[5],[6],[8]]}"#);
    let json: serde_json::Value = serde_json::from_str(&stdout(&latcoh(&["root", &s456, "--format", "json"]))).unwrap();
    assert_eq!(json["n_min"], -2);
    let at = |n: i64| json["vertices"].as_array().unwrap().iter().filter(|v| v["level"] == n).count();
    assert_eq!((at(-2), at(0)), (1, 3));
    assert_eq!(latcoh(&["root", &s45, "--format", "svg"]).status.code(), Some(1));
}

#[test]
fn ingest_files() {
    let dir = TempDir::new().unwrap();
    let cusp = file(&dir, "cusp.json", r#"{"ambient_dim": 2, "branches": [{"coords": [[[1,1,2]], [[1,1,3]]]}]}"#);
    let out_path = dir.path().join("s.json");
    let out = latcoh(&["ingest", &cusp, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("delta: 1") && text.contains("certificate: verified"), "{text}");
    assert_eq!(latcoh(&["validate", out_path.to_str().unwrap()]).status.code(), Some(0));

    let nagy = file(
        &dir,
        "nagy.json",
        r#"{"ambient_dim": 2, "branches": [{"coords": [[[1,1,7]], [[1,1,2]]]}, {"coords": [[[1,1,4]], [[1,1,5]]]}]}"#,
    );
    let text = stdout(&latcoh(&["ingest", &nagy]));
    assert!(text.contains("vector (2,4)") && text.contains("conductor: (14,20)") && text.contains("delta: 17"), "{text}");

    let out = latcoh(&["ingest", &nagy, "--truncation", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--truncation"));
}

#[test]
fn corpus_runs() {
    let out = latcoh(&["corpus", "--suite", "nonpositivity", "--suite", "kerU", "--max-genus", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("kerU: checked") && text.contains("failures 0"), "{text}");

    let a = latcoh(&["corpus", "--suite", "euler", "--seed", "11", "--count", "20"]);
    let b = latcoh(&["corpus", "--suite", "euler", "--seed", "11", "--count", "20"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("seed: 11"));

    let out = latcoh(&["corpus", "--suite", "MF-dag2", "--max-genus", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("witness: {"));
    assert_eq!(latcoh(&["corpus", "--suite", "bogus"]).status.code(), Some(1));
}
