use std::path::Path;
use std::process::{Command, Output};

use higgsflow::harness::Snapshot;

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_higgsflow"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .env_remove("HIGGSFLOW_OUT_DIR")
        .output()
        .unwrap()
}

const SMALL: &str = r#"{
    "scenarios": ["TWISTED(2)", "PERTURBED_NILPOTENT"],
    "seed": 1,
    "variation": {"directions": 2}
}"#;

#[test]
fn verify_passes_on_catalog_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--out", dir.path().join("o").to_str().unwrap()], SMALL);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/verify.csv")).unwrap();
    assert!(csv.starts_with("scenario,identity,residual,tolerance,status\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",PASS")));
    assert!(csv.contains("TWISTED(2),first_variation,"));
}

#[test]
fn tolerance_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace(r#""seed": 1,"#, r#""seed": 1, "tolerances": {"variation": 0.0},"#);
    let out = run(dir.path(), &["verify", "--out", dir.path().join("o").to_str().unwrap()], &cfg);
    assert_eq!(out.status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("o/verify.csv")).unwrap();
    assert!(csv.contains(",FAIL"));

    let cfg = SMALL.replace(r#""directions": 2"#, r#""directions": 2, "tolerance": 0.0"#);
    let out = run(dir.path(), &["variation", "--out", dir.path().join("v").to_str().unwrap()], &cfg);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--out", dir.path().to_str().unwrap()], r#"{"scenarios": ["MODULATED"]}"#);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("holomorphy"), "{err}");

    for bad in [r#"{"scenarios": ["NOPE"]}"#, r#"{"scenarios": ["FLAT"], "typo": 1}"#, "not json", r#"{"scenarios": []}"#] {
        let out = run(dir.path(), &["evaluate", "--out", dir.path().to_str().unwrap()], bad);
        assert_eq!(out.status.code(), Some(2), "{bad}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_higgsflow")).args(["frobnicate", "--config", "x.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_writes_fixed_header_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(dir.path(), &["evaluate", "--out", a.to_str().unwrap()], SMALL).status.success());
    assert!(run(dir.path(), &["evaluate", "--out", b.to_str().unwrap()], SMALL).status.success());
    let x = std::fs::read(a.join("evaluate.csv")).unwrap();
    assert_eq!(x, std::fs::read(b.join("evaluate.csv")).unwrap());
    let text = String::from_utf8(x).unwrap();
    assert_eq!(text.lines().next().unwrap(), "label,n,rank,deg,Vol,c,C_bound,J,I,gap,hym_residual,el_residual");
    assert_eq!(text.lines().count(), 3);

    // a different seed moves the perturbed metric
    let c = dir.path().join("c");
    assert!(run(dir.path(), &["evaluate", "--out", c.to_str().unwrap(), "--seed", "2"], SMALL).status.success());
    assert_ne!(text, std::fs::read_to_string(c.join("evaluate.csv")).unwrap());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, SMALL).unwrap();
    let target = dir.path().join("env");
    let out = Command::new(env!("CARGO_BIN_EXE_higgsflow"))
        .args(["sweep", "--config", cfg.to_str().unwrap()])
        .env("HIGGSFLOW_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(target.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("seed,label,"));
}

#[test]
fn flow_writes_trace_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "scenarios": [{"label": "warm start", "manifold": {"n": 1, "grid_points": 8},
                       "bundle": {"rank": 1, "twist_degree": 1},
                       "metric": {"kind": "conformal", "params": {"amplitude": 0.2, "modes": 1}, "seed": 4}}]
    }"#;
    let o = dir.path().join("o");
    let out = run(dir.path(), &["flow", "--out", o.to_str().unwrap()], cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = std::fs::read_to_string(o.join("flow_warm_start.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "step,t,J,hym_residual,el_residual,step_size,backtracks");
    let snap = Snapshot::read(&o.join("metric_warm_start.bin")).unwrap();
    assert_eq!((snap.n, snap.grid, snap.rank), (1, 8, 1));
    let h = snap.metric().unwrap();
    assert!(h.min_eigenvalue() > 0.0);
}

#[test]
fn scenario_files_resolve_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let spec = higgsflow::higgs_bundle::catalog_spec("NILPOTENT(2)", &higgsflow::higgs_bundle::ManifoldSpec::unit(1, 8)).unwrap();
    std::fs::write(dir.path().join("nil.json"), serde_json::to_string(&spec).unwrap()).unwrap();
    let o = dir.path().join("o");
    let out = run(dir.path(), &["evaluate", "--out", o.to_str().unwrap()], r#"{"scenarios": [{"file": "nil.json"}]}"#);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(o.join("evaluate.csv")).unwrap();
    // K = c0²·diag(1, −1), so J = c0⁴·Vol
    let j: f64 = csv.lines().nth(1).unwrap().split(',').nth(7).unwrap().parse().unwrap();
    assert!((j - 16.0).abs() < 1e-10, "{j}");
}

#[test]
fn config_command_must_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "evaluate", "scenarios": ["FLAT"]}"#;
    let out = run(dir.path(), &["flow", "--out", dir.path().to_str().unwrap()], cfg);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["evaluate", "--out", dir.path().to_str().unwrap()], cfg);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn flow_from_critical_metric_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scenarios": ["TWISTED(1)"], "manifold": {"n": 1, "grid_points": 8}}"#;
    let o = dir.path().join("o");
    assert_eq!(run(dir.path(), &["flow", "--out", o.to_str().unwrap()], cfg).status.code(), Some(0));
    let trace = std::fs::read_to_string(o.join("flow_TWISTED_1.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);
}

#[test]
fn nilpotent_flow_decreases_monotonically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"scenarios": ["NILPOTENT(1)"], "manifold": {"n": 1, "grid_points": 8}, "flow": {"max_steps": 500}}"#;
    let o = dir.path().join("o");
    // no convergence to C, but J goes down, so the run succeeds
    assert_eq!(run(dir.path(), &["flow", "--out", o.to_str().unwrap()], cfg).status.code(), Some(0));
    let trace = std::fs::read_to_string(o.join("flow_NILPOTENT_1.csv")).unwrap();
    let j: Vec<f64> = trace.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(j.len(), 501);
    assert!((j[0] - 1.0).abs() < 1e-12);
    assert!(j.windows(2).all(|w| w[1] <= w[0]));
    assert!(j[500] < j[0]);
}
