use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetaforge"))
        .args(args)
        .env("THETAFORGE_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn compute_g_golden() {
    let cache = tempfile::tempdir().unwrap();
    let out = run(&["compute-g", "p2", "--order", "3"], cache.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["data"]["[1]"], "2/1");
    assert_eq!(doc["data"]["[2]"], "15/1");
    assert_eq!(doc["manifest"]["order"], 3);
    assert!(doc["manifest"].get("started_at").is_none());
}

#[test]
fn theta_golden_csv() {
    let cache = tempfile::tempdir().unwrap();
    let out = run(&["theta", "p2", "--order", "6", "--format", "csv"], cache.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# manifest: "));
    assert!(text.lines().nth(1).unwrap() == "beta,D.beta,n,theta_coeff,N_n1");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 6);
    let theta: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(theta, ["2/1", "5/1", "32/1", "286/1", "3038/1", "35870/1"]);
    let n_n1: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
    assert_eq!(n_n1, ["1/1", "1/1", "4/1", "26/1", "217/1", "2110/1"]);
}

#[test]
fn theta_json_matches_csv() {
    let cache = tempfile::tempdir().unwrap();
    let json = run(&["theta", "p2", "--order", "4"], cache.path());
    let csv = run(&["theta", "p2", "--order", "4", "--format", "csv"], cache.path());
    let doc: Value = serde_json::from_str(&stdout(&json)).unwrap();
    let from_json: Vec<String> =
        doc["data"]["rows"].as_array().unwrap().iter().map(|r| r["theta_coeff"].as_str().unwrap().to_string()).collect();
    let from_csv: Vec<String> = csv_rows(&stdout(&csv)).into_iter().map(|r| r[3].clone()).collect();
    assert_eq!(from_json, from_csv);
    assert_eq!(doc["data"]["constant_term"], "1/1");
}

#[test]
fn exit_codes() {
    let cache = tempfile::tempdir().unwrap();
    let unknown = run(&["theta", "p3"], cache.path());
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr(&unknown).contains("p3"));
    let zero = run(&["compute-g", "p2", "--order", "0"], cache.path());
    assert_eq!(zero.status.code(), Some(3));
    assert!(stderr(&zero).contains("order too small"));
    let missing = run(&["two-point-table", "/nonexistent/geometry.json"], cache.path());
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn non_log_cy_requires_experimental() {
    let cache = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p2-line.json");
    let config = r#"{
        "name": "p2-line",
        "basis": [{"name": "1", "degree": 0}, {"name": "p", "degree": 1}, {"name": "p^2", "degree": 2}],
        "point": 2,
        "structconst": [[1, 1, 2, "1/1"]],
        "toricdivisors": [["0/1", "1/1", "0/1"], ["0/1", "1/1", "0/1"], ["0/1", "1/1", "0/1"]],
        "moripairings": [[1], [1], [1]],
        "D": ["0/1", "1/1", "0/1"]
    }"#;
    fs::write(&path, config).unwrap();
    let p = path.to_str().unwrap();
    let refused = run(&["theta", p, "--order", "3"], cache.path());
    assert_eq!(refused.status.code(), Some(2));
    assert!(stderr(&refused).contains("--experimental"));
    let allowed = run(&["compute-g", p, "--order", "3", "--experimental"], cache.path());
    assert_eq!(allowed.status.code(), Some(0), "{}", stderr(&allowed));
    let doc: Value = serde_json::from_str(&stdout(&allowed)).unwrap();
    assert_eq!(doc["manifest"]["log_cy"], false);
    assert_eq!(doc["manifest"]["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn custom_config_equals_builtin() {
    let cache = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p1xp1.json");
    let config = r#"{
        "name": "quadric",
        "basis": [{"name": "1", "degree": 0}, {"name": "a", "degree": 1}, {"name": "b", "degree": 1}, {"name": "ab", "degree": 2}],
        "point": 3,
        "structconst": [[1, 2, 3, "1/1"]],
        "toricdivisors": [["0/1","1/1","0/1","0/1"], ["0/1","1/1","0/1","0/1"], ["0/1","0/1","1/1","0/1"], ["0/1","0/1","1/1","0/1"]],
        "moripairings": [[1, 0], [1, 0], [0, 1], [0, 1]],
        "D": ["0/1", "2/1", "2/1", "0/1"]
    }"#;
    fs::write(&path, config).unwrap();
    let custom = run(&["theta", path.to_str().unwrap(), "--order", "3", "--format", "csv"], cache.path());
    let builtin = run(&["theta", "p1xp1", "--order", "3", "--format", "csv"], cache.path());
    assert_eq!(custom.status.code(), Some(0), "{}", stderr(&custom));
    assert_eq!(csv_rows(&stdout(&custom)), csv_rows(&stdout(&builtin)));
}

#[test]
fn verify_builtins() {
    let cache = tempfile::tempdir().unwrap();
    for (name, order) in [("p2", "6"), ("p1xp1", "5")] {
        let out = run(&["verify", name, "--order", order], cache.path());
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(doc["data"]["passed"], true);
        assert!(!stderr(&out).contains("FAIL"));
    }
}

#[test]
fn output_files_are_deterministic() {
    let cache = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&["two-point-table", "p2", "--order", "3", "--format", "csv", "--output", path.to_str().unwrap()], cache.path());
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).is_empty());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let rows = csv_rows(&text);
    assert!(rows.contains(&vec!["[1]".into(), "2".into(), "1".into(), "1/1".into(), "strict".into()]));
    assert!(rows.contains(&vec!["[1]".into(), "1".into(), "2".into(), "4/1".into(), "strict".into()]));
    let run_info: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.run.json")).unwrap()).unwrap();
    assert!(run_info["started_at"].is_string());
    assert_eq!(run_info["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn formal_mode_is_labelled() {
    let cache = tempfile::tempdir().unwrap();
    let out = run(&["two-point-table", "p2", "--order", "3", "--format", "csv", "--mode", "formal"], cache.path());
    let rows = csv_rows(&stdout(&out));
    assert!(rows.iter().all(|r| r[4] == "formal"));
    let n13 = rows.iter().find(|r| r[0] == "[3]" && r[1] == "1").unwrap();
    assert_eq!(n13[3], "256/1");
}

#[test]
fn cache_warm_cold_and_corrupted() {
    let cache = tempfile::tempdir().unwrap();
    let cold = run(&["theta", "p1xp1", "--order", "3"], cache.path());
    let files: Vec<_> = fs::read_dir(cache.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let warm = run(&["theta", "p1xp1", "--order", "3"], cache.path());
    assert_eq!(stdout(&cold), stdout(&warm));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("theta.json");
    run(&["theta", "p1xp1", "--order", "3", "--output", out.to_str().unwrap()], cache.path());
    let run_info: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("theta.json.run.json")).unwrap()).unwrap();
    assert_eq!(run_info["cache_hits"][0], "g");

    fs::write(&files[0], "{\"truncated").unwrap();
    let recovered = run(&["theta", "p1xp1", "--order", "3"], cache.path());
    assert_eq!(recovered.status.code(), Some(0));
    assert!(stderr(&recovered).contains("corrupted cache"));
    assert_eq!(stdout(&recovered), stdout(&cold));
    // the entry is rewritten
    assert!(serde_json::from_str::<Value>(&fs::read_to_string(&files[0]).unwrap()).is_ok());
}

#[test]
fn local_and_mirror_outputs() {
    let cache = tempfile::tempdir().unwrap();
    let local = run(&["local-invariants", "p2", "--order", "1"], cache.path());
    let doc: Value = serde_json::from_str(&stdout(&local)).unwrap();
    assert_eq!(doc["data"].as_object().unwrap().len(), 1);
    assert_eq!(doc["data"]["[1]"], "-2/1");
    let mirror = run(&["mirror-map", "p2", "--order", "3"], cache.path());
    let doc: Value = serde_json::from_str(&stdout(&mirror)).unwrap();
    assert_eq!(doc["data"]["inverse"]["y1"]["[2]"], "-6/1");
    assert_eq!(doc["data"]["forward"]["q1"]["[2]"], "6/1");
}
