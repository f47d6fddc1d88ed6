use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracmech"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fracmech-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "one diagnostic line: {text}");
    serde_json::from_str(text.trim_end()).unwrap()
}

const SHO: &str = r#"{
  "schema": 1,
  "system": "custom",
  "lagrangian": "0.5*q1^2 - 0.5*w^2*q0^2",
  "params": {"w": 1.0},
  "grid": {"a": 0.0, "b": 2.0, "n": 801},
  "boundary": {"left": [[0, 0.0]], "right": [[0, 0.9092974268256817]]}
}"#;

#[test]
fn derive_pu_prints_momenta_and_hamiltonian() {
    let dir = scratch("derive");
    let cfg = write_config(&dir, r#"{"schema": 1, "system": "pu"}"#);
    let out = run(&["derive"], &cfg);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = text.lines().map(|l| l.split(" = ").next().unwrap()).collect();
    assert_eq!(keys, ["EL", "p0", "p1", "H"]);
}

#[test]
fn solve_matches_sine_and_writes_files() {
    let dir = scratch("solve");
    let cfg = write_config(&dir, SHO);
    let out_dir = dir.join("out");
    let out = run(&["solve", "--out", out_dir.to_str().unwrap()], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["solver"]["relative_residual"].as_f64().unwrap() < 1e-9);
    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let mut worst = 0.0f64;
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        worst = worst.max((cols[1] - cols[0].sin()).abs());
        // 17 significant digits
        assert_eq!(line.split(',').next().unwrap().split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    }
    assert!(worst < 1e-3, "{worst}");
    assert!(out_dir.join("solve_report.json").exists());
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = scratch("determinism");
    let cfg = write_config(&dir, SHO);
    let a = run(&["solve"], &cfg);
    let b = run(&["solve"], &cfg);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let damped = write_config(&dir, r#"{"schema": 1, "system": "damped", "grid": {"a": 0, "b": 10, "n": 801}}"#);
    let k1 = run(&["kernel"], &damped);
    let k2 = run(&["kernel"], &damped);
    assert!(k1.status.success());
    assert_eq!(k1.stdout, k2.stdout);
}

#[test]
fn overrides_apply() {
    let dir = scratch("overrides");
    let cfg = write_config(&dir, SHO);
    let out = run(&["solve", "--grid-n", "101", "--alpha", "0.9"], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 102);
}

#[test]
fn exit_codes() {
    let dir = scratch("exit");
    let unknown = write_config(&dir, &SHO.replacen("\"schema\": 1,", "\"schema\": 1, \"extra\": true,", 1));
    let out = run(&["solve"], &unknown);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "config");

    let missing = dir.join("nope.json");
    assert_eq!(run(&["derive"], &missing).status.code(), Some(2));

    let singular = write_config(&dir, r#"{"schema": 1, "system": "custom", "lagrangian": "0.5*q0^2 + q1"}"#);
    let out = run(&["derive"], &singular);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["exit_code"], 3);

    let syntax = write_config(&dir, r#"{"schema": 1, "system": "custom", "lagrangian": "0.5*q1^^2"}"#);
    assert_eq!(run(&["derive"], &syntax).status.code(), Some(3));

    // x(0) = x(pi) = 0 for the unit oscillator
    let resonant = write_config(
        &dir,
        r#"{"schema": 1, "system": "custom", "lagrangian": "0.5*q1^2 - 0.5*q0^2",
            "grid": {"a": 0, "b": 3.141592653589793, "n": 201},
            "boundary": {"left": [[0, 0]], "right": [[0, 0]]}}"#,
    );
    let out = run(&["solve"], &resonant);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"], "singular");

    let no_command = bin().output().unwrap();
    assert_eq!(no_command.status.code(), Some(2));
    stderr_json(&no_command);
}

#[test]
fn kernel_reports() {
    let dir = scratch("kernel");
    let pu = write_config(&dir, r#"{"schema": 1, "system": "pu", "grid": {"a": 0, "b": 40, "n": 2001}}"#);
    let out = run(&["kernel"], &pu);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["method"], "mode_split");
    let gaps: Vec<f64> = v["gap_estimates"].as_array().unwrap().iter().map(|g| g.as_f64().unwrap()).collect();
    assert!((gaps[0] - 1.0).abs() < 0.02 && (gaps[1] - 10.0).abs() < 0.2, "{gaps:?}");

    let damped = write_config(&dir, r#"{"schema": 1, "system": "damped", "params": {"g": 0.5}, "grid": {"a": 0, "b": 10, "n": 1001}}"#);
    let v: serde_json::Value = serde_json::from_slice(&run(&["kernel"], &damped).stdout).unwrap();
    let dt: f64 = 0.01;
    let expected = 0.5 * 999.0 * ((2.0 * std::f64::consts::PI).ln() - (0.5 * dt).ln());
    assert!((v["log_c"].as_f64().unwrap() - expected).abs() < 1e-9);
}

#[test]
fn sweep_writes_one_csv_per_alpha() {
    let dir = scratch("sweep");
    let text = SHO.replacen("\"grid\"", "\"sweep\": {\"alphas\": [1.0, 0.99, 0.95, 0.9]}, \"grid\"", 1);
    let cfg = write_config(&dir, &text);
    let out_dir = dir.join("out");
    let out = run(&["sweep", "--out", out_dir.to_str().unwrap()], &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["entries"].as_array().unwrap().len(), 4);
    assert_eq!(summary["monotone"], true);
    for a in ["1", "0.99", "0.95", "0.9"] {
        assert!(out_dir.join(format!("trajectory_alpha_{a}.csv")).exists());
    }
}
