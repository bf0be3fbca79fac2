use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

/// Few steps and a light calibration so a solve takes about a second.
const QUICK: &str = r#"
[grid]
m = 4
k = 64

[solver]
steps = 400

[scaling]
calibration_samples = 2
calibration_steps = 400
"#;

fn octwave(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_octwave"));
    cmd.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("OCTWAVE_")) {
        cmd.env_remove(k);
    }
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("run octwave")
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("{QUICK}\n{extra}")).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(octwave(&[], &[]).status.code(), Some(2));
    assert_eq!(octwave(&["solve", "--bogus"], &[]).status.code(), Some(2));
    let help = octwave(&["--help"], &[]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("verify"));
}

#[test]
fn invalid_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[model]\nsigma = 1.0\ndelta = 2.0\n").unwrap();
    let out = octwave(&["solve", "--config", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.toml:3"), "{err}");
    assert!(err.contains("model.delta"), "{err}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.toml");
    std::fs::write(&path, "[solver]\nstepz = 10\n").unwrap();
    let out = octwave(&["solve", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn unknown_suite_and_regime_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(octwave(&["verify", "--suite", "nonexistent", "--out", out], &[]).status.code(), Some(2));
    assert_eq!(octwave(&["kernels", "--regime", "critical", "--out", out], &[]).status.code(), Some(2));
}

#[test]
fn kernels_filter_by_regime() {
    let dir = tempfile::tempdir().unwrap();
    let out = octwave(&["kernels", "--regime", "effective", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(dir.path().join("kernels.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let regime = headers.iter().position(|h| h == "regime").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| &r[regime] == "effective"));
    assert!(dir.path().join("manifest.json").exists());
    assert!(dir.path().join("kernels.json").exists());
}

#[test]
fn zero_data_solves_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[data]\nkind = \"zero\"\n");
    let out_dir = dir.path().join("out");
    let out = octwave(&["solve", "--config", &cfg, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let record = read_json(&out_dir.join("record.json"));
    assert_eq!(record["converged"], Value::Bool(true));
    assert_eq!(record["x_norm"].as_f64(), Some(0.0));
    for file in ["manifest.json", "norm_vs_time.dat", "u0.bin", "u1.bin", "u_final.bin"] {
        assert!(out_dir.join(file).exists(), "{file} missing");
    }
}

#[test]
fn budget_data_converges_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let runs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out_dir = dir.path().join(name);
            let out = octwave(&["solve", "--config", &cfg, "--seed", "3", "--out", out_dir.to_str().unwrap()], &[]);
            assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
            out_dir
        })
        .collect();
    let record = read_json(&runs[0].join("record.json"));
    assert!(record["iterations"].as_u64().unwrap() >= 2);
    let factors = record["contraction_factors"].as_array().unwrap();
    assert!(factors.iter().all(|f| f.as_f64().unwrap() <= 0.5));
    for file in ["record.json", "manifest.json", "u_final.bin"] {
        assert_eq!(std::fs::read(runs[0].join(file)).unwrap(), std::fs::read(runs[1].join(file)).unwrap(), "{file} differs");
    }
    assert_eq!(read_json(&runs[0].join("manifest.json"))["seed"].as_u64(), Some(3));
}

#[test]
fn oversized_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[data]\nkind = \"single_cube\"\namplitude = 1e6\n");
    let out = octwave(&["solve", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("nu/2"));
}

#[test]
fn lambda_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[data]\nkind = \"zero\"\n");
    let out_dir = dir.path().join("out");
    let out = octwave(&["solve", "--config", &cfg, "--lambda", "4", "--out", out_dir.to_str().unwrap()], &[("OCTWAVE_SCALING_LAMBDA", "2")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(read_json(&out_dir.join("record.json"))["problem"]["lambda"].as_f64(), Some(4.0));
    assert_eq!(read_json(&out_dir.join("manifest.json"))["flags"]["lambda"].as_str(), Some("4"));
}

#[test]
fn environment_overrides_reach_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[data]\nkind = \"zero\"\n");
    let out_dir = dir.path().join("env-out");
    let out = octwave(
        &["solve", "--config", &cfg],
        &[("OCTWAVE_SOLVER_STEPS", "200"), ("OCTWAVE_SEED", "11"), ("OCTWAVE_OUT", out_dir.to_str().unwrap())],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["seed"].as_u64(), Some(11));
    assert_eq!(manifest["config"]["solver"]["steps"].as_u64(), Some(200));
    assert_eq!(manifest["config_sha256"].as_str().map(str::len), Some(64));

    let bad = octwave(&["solve", "--config", &cfg, "--out", out_dir.to_str().unwrap()], &[("OCTWAVE_MODEL_P", "1")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("OCTWAVE_MODEL_P"));
}

#[test]
fn scaling_without_exponential_weight_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[norm]\nalpha = 0.0\n");
    let out = octwave(&["scale", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn scale_pipeline_handles_oversized_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("large.toml");
    std::fs::write(
        &cfg,
        "[grid]\nm = 1\nk = 512\n[data]\nkind = \"single_cube\"\ncubes = [[1]]\nadmissible_multiple = 10.0\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = octwave(&["solve", "--scale", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let selected: u32 = text
        .lines()
        .find_map(|l| l.strip_prefix("selected_lambda"))
        .map(|v| v.trim().parse().unwrap())
        .expect("selected_lambda line");
    assert!(selected > 2);
    for file in ["plan.json", "record.json", "descaled.json", "u_final_descaled.bin"] {
        assert!(out_dir.join(file).exists(), "{file} missing");
    }
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("original_residual"))
        .map(|v| v.trim().parse().unwrap())
        .expect("original_residual line");
    assert!(residual <= 1e-5, "{residual}");
}

#[test]
fn report_aggregates_a_solve() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(octwave(&["report", empty.to_str().unwrap()], &[]).status.code(), Some(2));
    assert_eq!(octwave(&["report", dir.path().join("missing").to_str().unwrap()], &[]).status.code(), Some(2));

    let cfg = write_config(dir.path(), "");
    let runs = dir.path().join("runs");
    let out = octwave(&["solve", "--config", &cfg, "--out", runs.join("desk").to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rep = octwave(&["report", runs.to_str().unwrap()], &[]);
    assert_eq!(rep.status.code(), Some(0), "{}", stderr(&rep));
    let rows = read_json(&runs.join("report/summary.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["kind"].as_str(), Some("solve"));
    assert_eq!(rows[0]["verdict"].as_str(), Some("PASS"));
    assert!(runs.join("report/plots/norm_vs_time__desk_record_json.dat").exists());
}
