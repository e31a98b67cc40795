use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn silevy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_silevy"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, value: &Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn base() -> Value {
    json!({
        "domain": {"type": "box", "p": 1, "side": 1.0},
        "triplet": {"b": 0.1, "sigma2": 0.5, "nu": {"stable": {"alpha": 1.2, "c": 1.0}}},
        "level": 8,
        "eps": 0.01,
        "targets": [[0.5]],
        "reps": 2,
        "seed": 3
    })
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_str().unwrap().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = base();
    c["reps"] = json!(1);
    c["integrand"] = json!({"type": "power_dist", "center": [0.5], "exponent": 0.5});
    let cfg = write_config(dir.path(), &c);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = silevy(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    let names: Vec<&str> = ta.iter().map(|(n, _)| n.as_str()).collect();
    assert!(names.contains(&"path_0000/x/jumps.jsonl"));
    assert!(names.contains(&"path_0000/y/cells.csv"));
    // the index echoes the output directory, which differs between the runs
    let strip = |t: Vec<(String, Vec<u8>)>| -> Vec<(String, Vec<u8>)> {
        t.into_iter().filter(|(n, _)| n != "run.json").collect()
    };
    assert_eq!(strip(ta), strip(tb));
}

#[test]
fn zero_reps_write_metadata_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base());
    let out = dir.path().join("out");
    let o = silevy(&[
        "simulate",
        "--config",
        &cfg,
        "--reps",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let files = read_tree(&out);
    assert_eq!(files.len(), 1);
    assert_eq!(files[0].0, "run.json");
    let index = json_file(&out.join("run.json"));
    assert_eq!(index["paths"], json!([]));
    assert_eq!(index["config"]["reps"], json!(0));
}

#[test]
fn missing_integrand_exports_x_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base());
    let out = dir.path().join("out");
    assert!(
        silevy(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .success()
    );
    assert!(out.join("path_0001/x/header.json").exists());
    assert!(!out.join("path_0000/y").exists());
    let index = json_file(&out.join("run.json"));
    assert!(index["paths"][0].get("y").is_none());
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base());
    let first = dir.path().join("first");
    assert!(silevy(&[
        "simulate",
        "--config",
        &cfg,
        "--seed",
        "11",
        "--out",
        first.to_str().unwrap()
    ])
    .status
    .success());
    let mut echoed = json_file(&first.join("run.json"))["config"].clone();
    let second = dir.path().join("second");
    echoed["out"] = json!(second);
    let again = dir.path().join("again.json");
    std::fs::write(&again, echoed.to_string()).unwrap();
    assert!(silevy(&["simulate", "--config", again.to_str().unwrap()])
        .status
        .success());
    let a = std::fs::read(first.join("path_0001/x/cells.csv")).unwrap();
    let b = std::fs::read(second.join("path_0001/x/cells.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn integrate_reports_exact_jump_structure() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = base();
    c["integrand"] = json!({"type": "power_dist", "center": [0.5], "exponent": 1.0});
    let cfg = write_config(dir.path(), &c);
    let out = dir.path().join("out");
    let o = silevy(&[
        "integrate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_file(&out.join("integrate.json"));
    assert_eq!(r["max_jump_error"], json!(0.0));
    assert_eq!(r["support_exact"], json!(true));
    assert_eq!(r["paths"].as_array().unwrap().len(), 2);

    let bare = write_config(dir.path(), &base());
    let o = silevy(&[
        "integrate",
        "--config",
        &bare,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_target_list_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = base();
    c["targets"] = json!([]);
    let cfg = write_config(dir.path(), &c);
    let o = silevy(&["exponent", "--config", &cfg]);
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["summary"], json!([]));
    assert!(r["paths"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["x"] == json!([])));
}

#[test]
fn calibration_mode_recovers_known_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = base();
    c["level"] = json!(16);
    c["test_functions"] = json!([0.25, 0.5, 1.0]);
    c["estimator"] = json!({"holder": true, "c_exp": true, "localized": true, "tolerance": 0.1});
    let cfg = write_config(dir.path(), &c);
    let o = silevy(&["exponent", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["mode"], json!("calibration"));
    let rows = r["calibration"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let a = row["exponent"].as_f64().unwrap();
        let e = &row["estimates"]["holder"];
        assert!((e["value"].as_f64().unwrap() - a).abs() < 0.1);
        assert!(e["r2"].as_f64().unwrap() >= 0.98);
    }
    assert!(r["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v["pass"] == json!(true)));
}

#[test]
fn stored_paths_are_analysed_with_infinite_sentinel() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = base();
    // pure compound Poisson with big jumps: locally constant paths
    c["triplet"] = json!({"nu": {"atoms": [{"x": 2.0, "rate": 1.0}]}});
    c["level"] = json!(12);
    let cfg = write_config(dir.path(), &c);
    let sims = dir.path().join("sims");
    assert!(silevy(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        sims.to_str().unwrap()
    ])
    .status
    .success());
    c["paths"] = json!(sims);
    c["estimator"] = json!({"holder": true, "tolerance": 0.1});
    let cfg = write_config(dir.path(), &c);
    let o = silevy(&["exponent", "--config", &cfg]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["mode"], json!("stored"));
    assert_eq!(r["predictions"][0]["x"]["holder"], json!(["inf", "inf"]));
    let est = &r["paths"][0]["x"][0]["holder"]["value"];
    assert_eq!(est, &json!("inf"));
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = base();
    c["bogus"] = json!(1);
    let cfg = write_config(dir.path(), &c);
    assert_eq!(silevy(&["info", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(silevy(&["simulate"]).status.code(), Some(2));
    assert_eq!(silevy(&["frobnicate"]).status.code(), Some(2));
    let mut c = base();
    c["targets"] = json!([[2.0]]);
    let cfg = write_config(dir.path(), &c);
    assert_eq!(
        silevy(&["exponent", "--config", &cfg]).status.code(),
        Some(2)
    );
}

#[test]
fn info_reports_run_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &base());
    let o = silevy(&["info", "--config", &cfg]);
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["run"]["cells"], json!(257));
    assert_eq!(r["run"]["beta"], json!(1.2));
    assert!((r["run"]["var_rate"].as_f64().unwrap() - (0.5 + 2.0 / 0.8)).abs() < 1e-12);
    let o = silevy(&["info"]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["run"].is_null());
}
