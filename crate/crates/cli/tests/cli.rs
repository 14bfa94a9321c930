//! Binary-level tests: exit codes, report contents, environment overrides,
//! and the byte-identical determinism guarantee.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn fvp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fvp"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn read_report(dir: &Path) -> BTreeMap<String, String> {
    let text = fs::read_to_string(dir.join("report.csv")).expect("report.csv");
    text.lines()
        .skip(1)
        .map(|line| {
            let (name, value) = line.split_once(',').expect("name,value row");
            (name.to_string(), value.to_string())
        })
        .collect()
}

#[test]
fn backward_reachable_mode_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let status = fvp()
        .args(["run"])
        .arg(repo_config("backward_reachable.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = read_report(dir.path());
    assert_eq!(report["verdict"], "compatible");
    let u0_mode_1: f64 = report["u0_mode_1"].parse().unwrap();
    assert!((u0_mode_1 - 1.0).abs() <= 1e-12, "u0_mode_1 = {u0_mode_1}");
    assert!(dir.path().join("trajectory.csv").exists());
    assert_eq!(report["library_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config_hash"].len(), 16);
}

#[test]
fn backward_unreachable_mode_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let status = fvp()
        .args(["run"])
        .arg(repo_config("backward_unreachable.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let report = read_report(dir.path());
    assert_eq!(report["verdict"], "incompatible");
    assert_eq!(report["worst_mode"], "20");
    let amp: f64 = report["worst_log_amplification"].parse().unwrap();
    assert!((amp - 400.0).abs() <= 1e-9, "log-amplification {amp}");
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn diagnostics_table_contains_the_e9_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let status = fvp()
        .args(["run"])
        .arg(repo_config("diagnostics_interval.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("instability.csv")).unwrap();
    let k3 = table.lines().find(|l| l.starts_with("3,")).expect("mode 3 row");
    assert!(k3.contains("8103.0839"), "row: {k3}");
    // high modes carry the log column but a flagged linear column
    let k30 = table.lines().find(|l| l.starts_with("30,")).expect("mode 30 row");
    assert!(k30.contains("900") && k30.contains("overflow"), "row: {k30}");
    let cond = fs::read_to_string(dir.path().join("conditioning.csv")).unwrap();
    let t1 = cond.lines().find(|l| l.starts_with("1,")).expect("T = 1 row");
    assert!(t1.starts_with("1,17,"), "row: {t1}");
}

#[test]
fn criterion_9_byte_identical_reruns() {
    // identical config + seed => byte-identical CSV artifacts
    let mut all_artifacts = Vec::new();
    for name in [
        "backward_reachable.json",
        "forward_decay.json",
        "steer_two_modes.json",
        "boundary_constant.json",
        "diagnostics_interval.json",
        "matrix_counterexample.json",
    ] {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        for dir in [&dir_a, &dir_b] {
            let status = fvp()
                .args(["run"])
                .arg(repo_config(name))
                .arg("--out-dir")
                .arg(dir.path())
                .status()
                .unwrap();
            assert_eq!(status.code(), Some(0), "{name} failed");
        }
        let mut names: Vec<String> = fs::read_dir(dir_a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for file in &names {
            let a = fs::read(dir_a.path().join(file)).unwrap();
            let b = fs::read(dir_b.path().join(file)).unwrap();
            assert_eq!(a, b, "{name}: artifact {file} differs between reruns");
        }
        all_artifacts.push((name, names.len()));
    }
    println!("ACCEPT 9 determinism: PASS (byte-identical artifacts across reruns: {all_artifacts:?})");
}

#[test]
fn validate_reports_underresolved_quadrature() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{
            "scenario": "forward",
            "domain": { "kind": "interval", "length": 3.14, "n_modes": 16, "n_quad": 32 },
            "time": { "horizon": -1.0 },
            "data": { "u0": { "kind": "zero" } }
        }"#,
    )
    .unwrap();
    let output = fvp().args(["validate"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("domain.n_quad") && stdout.contains("underresolved"), "{stdout}");
    assert!(stdout.contains("time.horizon"), "{stdout}");
}

#[test]
fn validate_accepts_well_formed_configs() {
    for name in [
        "backward_reachable.json",
        "forward_decay.json",
        "steer_two_modes.json",
        "boundary_constant.json",
        "diagnostics_interval.json",
        "matrix_counterexample.json",
        "backward_unreachable.json",
    ] {
        let status = fvp().args(["validate"]).arg(repo_config(name)).status().unwrap();
        assert_eq!(status.code(), Some(0), "{name} should validate cleanly");
    }
}

#[test]
fn malformed_json_exits_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ \"scenario\": \"forward\",, }").unwrap();
    let output = fvp().args(["run"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("line"), "expected a line-addressed message, got: {stderr}");
}

#[test]
fn unknown_field_is_rejected_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    fs::write(
        &path,
        r#"{ "scenario": "forward", "domian": {}, "data": {} }"#,
    )
    .unwrap();
    let output = fvp().args(["run"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("domian"), "{stderr}");
}

#[test]
fn env_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let status = fvp()
        .args(["run"])
        .arg(repo_config("matrix_counterexample.json"))
        .env("FVP_OUT_DIR", dir.path())
        .env("FVP_SVG", "1")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("report.csv").exists());
    assert!(dir.path().join("height.svg").exists(), "FVP_SVG should enable plots");
    let report = read_report(dir.path());
    assert_eq!(report["hyponormal"], "false");
    assert_eq!(report["accretive_square"], "false");
    let half: f64 = report["sector_half_angle"].parse().unwrap();
    assert!(half <= std::f64::consts::FRAC_PI_4 + 1e-9);
}

#[test]
fn flag_overrides_beat_environment() {
    let dir_flag = tempfile::tempdir().unwrap();
    let dir_env = tempfile::tempdir().unwrap();
    let status = fvp()
        .args(["run"])
        .arg(repo_config("steer_two_modes.json"))
        .env("FVP_OUT_DIR", dir_env.path())
        .arg("--out-dir")
        .arg(dir_flag.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir_flag.path().join("report.csv").exists());
    assert!(!dir_env.path().join("report.csv").exists());
}

#[test]
fn steer_report_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let status = fvp()
        .args(["run"])
        .arg(repo_config("steer_two_modes.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = read_report(dir.path());
    let residual: f64 = report["residual"].parse().unwrap();
    assert!(residual <= 1e-10, "steering residual {residual}");
    let control = fs::read_to_string(dir.path().join("control.csv")).unwrap();
    // theta = 1/2 for mode 2 (lambda = 4) at T = 1
    let m2 = control.lines().find(|l| l.starts_with("2,")).unwrap();
    assert!(m2.contains(",0.5,"), "row: {m2}");
}

#[test]
fn boundary_report_carries_the_yield_anchor() {
    // constant (1,0) over T = 5: z_g mode 1 = -sqrt(2/pi)(1 - e^{-5})
    let dir = tempfile::tempdir().unwrap();
    let status = fvp()
        .args(["run"])
        .arg(repo_config("boundary_constant.json"))
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = read_report(dir.path());
    let z1: f64 = report["z_g_mode_1"].parse().unwrap();
    let expect = -(2.0 / std::f64::consts::PI).sqrt() * (1.0 - (-5.0f64).exp());
    assert!((z1 - expect).abs() <= 1e-10, "z_g mode 1 = {z1} vs {expect}");
    assert!(dir.path().join("eps_trace.csv").exists());
}
