use std::fs;
use std::process::Command;

use predfl_bench::{read_csv, read_json};

fn predfl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_predfl"))
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rows.csv");
    let status = predfl()
        .args(["run", "--dataset", "uniform:60:100", "--batch-size", "30", "--alphas", "0,1", "--trials", "3"])
        .args(["--algorithms", "predfl,meyerson,min", "--out"])
        .arg(&csv_path)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_csv(fs::File::open(&csv_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3);

    let json_path = dir.path().join("rows.json");
    let status = predfl()
        .args(["run", "--dataset", "uniform:60:100", "--batch-size", "30", "--alphas", "0,1", "--trials", "3"])
        .args(["--algorithms", "predfl,meyerson,min", "--format", "json", "--out"])
        .arg(&json_path)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read_json(fs::File::open(&json_path).unwrap()).unwrap(), rows);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("points.txt");
    fs::write(&points, "x y label\n0 0 a\n1 0 a\n0 1 b\n9 9 b\n9 8 c\n").unwrap();
    let config = dir.path().join("sweep.cfg");
    fs::write(
        &config,
        format!("dataset = {}\ncolumns = drop-last:1\nfacility-cost = 2\ntrials = 2\nalphas = 0\n", points.display()),
    )
    .unwrap();
    let out = predfl().arg("run").arg("--config").arg(&config).args(["--trials", "4"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.trials == 4 && r.facility_cost == 2.0 && r.n_points == 5));
    assert!(rows.iter().all(|r| r.opt_exactness == predfl::Exactness::Exact && r.ratio_mean >= 1.0 - 1e-9));
}

#[test]
fn fatal_errors_exit_nonzero() {
    for args in [
        vec!["run", "--trials", "0"],
        vec!["run", "--alphas", "2"],
        vec!["run", "--dataset", "/nonexistent/points.csv"],
        vec!["replay", "--instance", "/nonexistent.json"],
        vec!["gen-lb", "--alpha", "0.3"],
    ] {
        let out = predfl().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
}

#[test]
fn gen_lb_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("lb.json");
    assert!(predfl().args(["gen-lb", "--m", "2", "--alpha", "1", "--seed", "5", "--out"]).arg(&inst).status().unwrap().success());
    for alg in ["meyerson", "predfl", "min"] {
        let out = predfl().args(["replay", "--algorithm", alg, "--seed", "2", "--instance"]).arg(&inst).output().unwrap();
        assert!(out.status.success());
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(v["total"].as_f64().unwrap() >= 4.0);
        assert!(v.get("trace").is_none());
    }
    let out = predfl().args(["replay", "--trace", "--instance"]).arg(&inst).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["trace"].as_array().unwrap().len(), 7);
}

#[test]
fn solve_offline_emits_solution() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("p.csv");
    fs::write(&points, "0,0\n1,0\n0,1\n5,5\n").unwrap();
    let out = predfl().args(["solve-offline", "--facility-cost", "1", "--dataset"]).arg(&points).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["solution"]["total"].as_f64().unwrap(), 4.0);
    assert_eq!(v["solution"]["exactness"], "Exact");
    let out = predfl().args(["solve-offline", "--batch", "3", "--facility-cost", "1", "--dataset"]).arg(&points).output().unwrap();
    assert!(!out.status.success());
}
