//! End-to-end tests of the command-line interface: the
//! calibrate -> simulate -> meanfield -> compare pipeline, the sweep, and
//! the exit-code contract (0 ok, 2 config error, 3 runtime error,
//! 4 threshold exceeded).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_patchmule"))
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let path = std::env::temp_dir().join(format!(
            "patchmule-cli-{tag}-{}-{}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .unwrap()
                .subsec_nanos()
        ));
        fs::create_dir_all(&path).unwrap();
        Self(path)
    }

    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

/// A small world: 3 sources on a 4 km map, one-day calibration, short runs.
const SMALL_CONFIG: &str = r#"
[map]
width_m = 4000.0
height_m = 4000.0
water_sources = 3
radio_range_m = 1500.0

[movement]
calibration_days = 2.0

[model]
population = 12

[simulation]
horizon_days = 4.0
sample_step_days = 0.5
seed = 31
runs = 2

[sweep]
ranges_m = [500.0, 2000.0]
runs_per_range = 2
calibration_days = 1.0
"#;

fn write_config(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("experiment.toml");
    fs::write(&path, SMALL_CONFIG).unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("binary runs").status.code().unwrap()
}

#[test]
fn calibrate_simulate_meanfield_compare_pipeline() {
    let dir = TempDir::new("pipeline");
    let config = write_config(&dir);
    let rates = dir.path().join("rates.json");

    run_ok(bin().args([
        "calibrate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        rates.to_str().unwrap(),
    ]));
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&rates).unwrap()).unwrap();
    assert_eq!(parsed["rates"]["alpha"].as_array().unwrap().len(), 3);
    assert_eq!(parsed["rng_algorithm"], "chacha8");

    let sim_out = dir.path().join("sim");
    run_ok(bin().args([
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        rates.to_str().unwrap(),
        "--out",
        sim_out.to_str().unwrap(),
    ]));
    for name in ["run_000.csv", "run_001.csv", "mean.csv", "report.json"] {
        assert!(sim_out.join(name).exists(), "{name} missing");
    }
    let mean_csv = fs::read_to_string(sim_out.join("mean.csv")).unwrap();
    assert!(mean_csv.starts_with("# tool: patchmule"));
    assert!(mean_csv.contains("# seed: 31"));
    assert!(mean_csv.contains("# config: "));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sim_out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runs"], 2);
    assert!(report["mean_r"].as_f64().unwrap() <= 1.0);
    assert_eq!(report["config"]["simulation"]["seed"], 31);
    assert!(report.get("mean_time_averaged_r").is_none());

    // The time-averaged variant appears only behind its flag.
    let flagged = dir.path().join("sim_flagged");
    run_ok(bin().args([
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        rates.to_str().unwrap(),
        "--out",
        flagged.to_str().unwrap(),
        "--time-averaged-r",
    ]));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(flagged.join("report.json")).unwrap()).unwrap();
    assert!(report["mean_time_averaged_r"].as_f64().unwrap() <= 1.0);

    let mf_out = dir.path().join("mf");
    run_ok(bin().args([
        "meanfield",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        rates.to_str().unwrap(),
        "--out",
        mf_out.to_str().unwrap(),
    ]));
    assert!(mf_out.join("meanfield.csv").exists());
    assert!(mf_out.join("meanfield_report.json").exists());

    // Same grid and schema, so compare succeeds; a generous threshold holds.
    run_ok(bin().args([
        "compare",
        sim_out.join("mean.csv").to_str().unwrap(),
        mf_out.join("meanfield.csv").to_str().unwrap(),
        "--max-dev",
        "1e6",
    ]));

    // A file against itself deviates by exactly zero.
    let out = run_ok(bin().args([
        "compare",
        sim_out.join("mean.csv").to_str().unwrap(),
        sim_out.join("mean.csv").to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("max 0.000000e0"), "unexpected: {stdout}");
}

#[test]
fn calibrate_twice_is_byte_identical() {
    let dir = TempDir::new("deterministic");
    let config = write_config(&dir);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        run_ok(bin().args([
            "calibrate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn single_run_mean_matches_the_run() {
    let dir = TempDir::new("singlerun");
    let config = write_config(&dir);
    let rates = dir.path().join("rates.json");
    run_ok(bin().args([
        "calibrate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        rates.to_str().unwrap(),
    ]));
    let out_dir = dir.path().join("sim");
    run_ok(bin().args([
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        rates.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--runs",
        "1",
    ]));
    let data = |name: &str| -> Vec<String> {
        fs::read_to_string(out_dir.join(name))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    };
    // Headers differ (per-file seeds); the sampled data must not.
    assert_eq!(data("run_000.csv"), data("mean.csv"));
}

#[test]
fn meanfield_reruns_are_byte_identical() {
    let dir = TempDir::new("mfdet");
    let config = write_config(&dir);
    let rates = dir.path().join("rates.json");
    run_ok(bin().args([
        "calibrate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        rates.to_str().unwrap(),
    ]));
    let (a, b) = (dir.path().join("mf_a"), dir.path().join("mf_b"));
    for out in [&a, &b] {
        run_ok(bin().args([
            "meanfield",
            "--config",
            config.to_str().unwrap(),
            "--rates",
            rates.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]));
    }
    assert_eq!(
        fs::read(a.join("meanfield.csv")).unwrap(),
        fs::read(b.join("meanfield.csv")).unwrap()
    );
}

#[test]
fn unknown_config_key_exits_with_config_code() {
    let dir = TempDir::new("badkey");
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[simulation]\nhorizon_days = 5.0\ntypo_key = 1\n").unwrap();
    let out = bin()
        .args(["calibrate", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("typo_key"), "diagnostic missing key: {stderr}");
}

#[test]
fn malformed_rates_exit_without_partial_outputs() {
    let dir = TempDir::new("badrates");
    let config = write_config(&dir);
    let rates = dir.path().join("rates.json");
    fs::write(&rates, "{ this is not json").unwrap();
    let out_dir = dir.path().join("sim");
    let code = exit_code(bin().args([
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        rates.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(code, 3);
    assert!(!out_dir.exists(), "failed run must not leave outputs");

    let code = exit_code(bin().args([
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        dir.path().join("missing.json").to_str().unwrap(),
    ]));
    assert_eq!(code, 3);
}

#[test]
fn compare_threshold_failures_use_their_own_exit_code() {
    let dir = TempDir::new("threshold");
    let config = write_config(&dir);
    let rates = dir.path().join("rates.json");
    run_ok(bin().args([
        "calibrate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        rates.to_str().unwrap(),
    ]));
    let sim_out = dir.path().join("sim");
    let mf_out = dir.path().join("mf");
    run_ok(bin().args([
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        rates.to_str().unwrap(),
        "--out",
        sim_out.to_str().unwrap(),
    ]));
    run_ok(bin().args([
        "meanfield",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        rates.to_str().unwrap(),
        "--out",
        mf_out.to_str().unwrap(),
    ]));
    let code = exit_code(bin().args([
        "compare",
        sim_out.join("mean.csv").to_str().unwrap(),
        mf_out.join("meanfield.csv").to_str().unwrap(),
        "--max-dev",
        "1e-300",
    ]));
    assert_eq!(code, 4);
}

#[test]
fn compare_rejects_disjoint_grids() {
    let dir = TempDir::new("grids");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, "t,N_0,A_0\n0.0,1.0,0.0\n1.0,1.0,1.0\n").unwrap();
    fs::write(&b, "t,N_0,A_0\n0.0,1.0,0.0\n2.0,1.0,2.0\n").unwrap();
    let code = exit_code(bin().args([
        "compare",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
    ]));
    assert_eq!(code, 3);
}

#[test]
fn sweep_dry_run_plans_without_writing() {
    let dir = TempDir::new("dryrun");
    let config = write_config(&dir);
    let out_dir = dir.path().join("sweep");
    let out = run_ok(bin().args([
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--dry-run",
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("plan:"), "no plan printed: {stdout}");
    assert!(stdout.contains("range 500 m"));
    assert!(!out_dir.exists());
}

#[test]
fn sweep_emits_one_row_per_range() {
    let dir = TempDir::new("sweep");
    let config = write_config(&dir);
    let out_dir = dir.path().join("sweep");
    run_ok(bin().args([
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "2",
    ]));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("range_m,mean_R,std_R,runs"));
    assert_eq!(lines.count(), 2);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_dry_run_prints_the_plan() {
    let dir = TempDir::new("simdry");
    let config = write_config(&dir);
    let rates = dir.path().join("rates.json");
    run_ok(bin().args([
        "calibrate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        rates.to_str().unwrap(),
    ]));
    let out = run_ok(bin().args([
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--rates",
        rates.to_str().unwrap(),
        "--runs",
        "7",
        "--dry-run",
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("7 runs"), "plan missing runs: {stdout}");
}
