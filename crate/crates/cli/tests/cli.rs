//! End-to-end checks of the command-line surface: exit codes, report
//! files, replay round-trips and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-tower"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn find_artifact(base: &Path, name: &str) -> PathBuf {
    let mut hits: Vec<PathBuf> = std::fs::read_dir(base)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path().join(name);
            p.exists().then_some(p)
        })
        .collect();
    hits.sort();
    hits.pop().unwrap_or_else(|| panic!("no {name} under {}", base.display()))
}

#[test]
fn spectrum_analytic_check_single_square() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "cube.cfg",
        "dim = 2\nbase_unit = 1\nhalfwidths = 1\ncount = 3\n",
    );
    let out_dir = tmp.path().join("runs");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "spectrum",
        "--h",
        "1/64",
        "--analytic-check",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = find_artifact(&out_dir, "spectrum.json");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let max_rel = json["analytic"]["max_relative_error"].as_f64().unwrap();
    assert!(max_rel < 0.01, "relative error {max_rel}");
    // manifest written with success status
    let manifest = find_artifact(&out_dir, "manifest.json");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(m["exit_status"], 0);
    assert_eq!(m["command"], "spectrum");
}

#[test]
fn malformed_config_exits_2_without_run_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.cfg", "halfwidths = 1.5\n");
    let out_dir = tmp.path().join("runs");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "spectrum",
    ]);
    assert_eq!(exit_code(&out), 2);
    // tower validation happens after the run dir exists; a manifest with
    // the failure status is still written
    let manifest = find_artifact(&out_dir, "manifest.json");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(m["exit_status"], 2);

    // an unparseable file gets no run directory at all
    let cfg = write(tmp.path(), "worse.cfg", "halfwidths 1\n");
    let out_dir2 = tmp.path().join("runs2");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir2.to_str().unwrap(),
        "spectrum",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(!out_dir2.exists());
}

#[test]
fn construct_verify_replay_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "grow.cfg",
        "epsilon = 0.2\ncubes = 2\nh0 = 1/8\nseed = 7\n",
    );
    let out_dir = tmp.path().join("runs");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "construct",
        "--verify",
        "--dump-fields",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trace = find_artifact(&out_dir, "trace.json");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(json["verdicts"]["all_ok"], true);
    assert_eq!(json["steps"].as_array().unwrap().len(), 1);
    // field dumps for the initial state and the accepted step
    let psi0 = find_artifact(&out_dir, "psi_00.txt");
    let first = std::fs::read_to_string(psi0).unwrap();
    let cols = first.lines().next().unwrap().split_whitespace().count();
    assert_eq!(cols, 3);

    let out = run(&[
        "--out",
        out_dir.to_str().unwrap(),
        "construct",
        "--replay",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let replay = find_artifact(&out_dir, "replay.json");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(replay).unwrap()).unwrap();
    assert_eq!(json["reproduced"], true);
    assert!(json["max_deviation"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn construct_without_refinement_budget_exits_3_with_partial_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "tight.cfg",
        "epsilon = 0.002\ncubes = 2\nh0 = 1/8\nmax_refinements = 0\n",
    );
    let out_dir = tmp.path().join("runs");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "construct",
    ]);
    assert_eq!(exit_code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let trace = find_artifact(&out_dir, "trace.json");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(trace).unwrap()).unwrap();
    assert!(json["failure"].as_str().unwrap().contains("step 1"));
    assert_eq!(json["steps"].as_array().unwrap().len(), 0);
}

#[test]
fn resolvent_benchmark_with_dense_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "pair.cfg",
        "base_unit = 8\nhalfwidths = 8, 17\nwindows = 2\nh = 1/8\n",
    );
    let out_dir = tmp.path().join("runs");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "resolvent",
        "--ell",
        "2",
        "--dense-oracle",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = find_artifact(&out_dir, "resolvent.json");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert!(json["telescoping_residual"].as_f64().unwrap() <= 1e-11);
    assert!(json["dense"]["max_singular_value_deviation"].as_f64().unwrap() <= 1e-6);
    assert!(json["op_norm"].as_f64().unwrap() > 0.0);

    // a single square has no window pair to compare
    let cfg = write(tmp.path(), "one.cfg", "base_unit = 1\nhalfwidths = 1\n");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "resolvent",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn quasimode_scan_and_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "scan.cfg",
        "base_unit = 1\nhalfwidths = 4, 8\nwindows = 1\nh = 1/8\n",
    );
    let out_dir = tmp.path().join("runs");
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "quasimode",
        "--lambda",
        "0",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("slope "));
    let csv = find_artifact(&out_dir, "scan.csv");
    let body = std::fs::read_to_string(csv).unwrap();
    assert!(body.starts_with("R,h,residual\n"));
    assert_eq!(body.lines().count(), 3);

    // negative target is rejected
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "quasimode",
        "--lambda",
        "-1",
    ]);
    assert_eq!(exit_code(&out), 2);

    // a single truncation yields a table without a slope
    let cfg = write(
        tmp.path(),
        "single.cfg",
        "base_unit = 1\nhalfwidths = 4, 8\nwindows = 1\nh = 1/8\ntruncations = 2\n",
    );
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "quasimode",
        "--lambda",
        "0",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(!String::from_utf8_lossy(&out.stdout).contains("slope "));
}

#[test]
fn reports_are_deterministic_given_config_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "cube.cfg",
        "base_unit = 1\nhalfwidths = 1\ncount = 3\nh = 1/16\nseed = 42\n",
    );
    let mut bodies = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = tmp.path().join(sub);
        let out = run(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "spectrum",
        ]);
        assert_eq!(exit_code(&out), 0);
        let report = find_artifact(&out_dir, "spectrum.json");
        bodies.push(std::fs::read(report).unwrap());
    }
    assert_eq!(bodies[0], bodies[1], "reports differ across identical runs");
}
