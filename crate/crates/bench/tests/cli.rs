use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use smc_bench::io::{parse_kv, parse_summary, parse_trace_csv};
use smc_bench_core::engine::TraceRecord;

const BIN: &str = env!("CARGO_BIN_EXE_smc-bench");

fn reference() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml")
}

fn smc(args: &[&str]) -> Command {
    let mut c = Command::new(BIN);
    c.args(args).env_remove(smc_bench::OUT_DIR_ENV);
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    smc(args).arg("--out-dir").arg(dir).output().unwrap()
}

#[test]
fn converged_simulation_exits_zero_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = reference();
    let out = run_in(
        dir.path(),
        &["simulate", "--config", p.to_str().unwrap(), "--set", "controller.kind=terminal", "--set", "simulation.duration=0.6"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = std::fs::read_to_string(dir.path().join("reference.trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), TraceRecord::COLUMNS.join(","));
    let records = parse_trace_csv(&trace).unwrap();
    assert_eq!(records.len(), 6000);
    let summary = parse_summary(&std::fs::read_to_string(dir.path().join("reference.summary")).unwrap()).unwrap();
    assert!(summary.converged());
    let last = records.last().unwrap().energy;
    assert!((summary.energy - last).abs() <= 5e-9 * last);
}

#[test]
fn non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = reference();
    let out = run_in(dir.path(), &["simulate", "--config", p.to_str().unwrap(), "--set", "simulation.duration=0.1", "--set", "simulation.dwell=0.05"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("reference.summary").exists());
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["simulate", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config not found"));
}

#[test]
fn equal_thresholds_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let p = reference();
    let out = run_in(dir.path(), &["simulate", "--config", p.to_str().unwrap(), "--set", "controller.beta2=0.85"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("β₂ < β₁"));
    assert!(!dir.path().join("reference.trace.csv").exists());
}

#[test]
fn parse_and_blow_up_errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[plant]\nmasss = 1\n").unwrap();
    let out = run_in(dir.path(), &["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let parse_msg = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(parse_msg.contains("parse"), "{parse_msg}");

    // the actuator force overflows on the first sample
    let p = reference();
    let out = run_in(
        dir.path(),
        &[
            "simulate",
            "--config",
            p.to_str().unwrap(),
            "--set",
            "plant.input_gain=1e308",
            "--set",
            "controller.kind=terminal",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(msg.contains("non-finite"), "{msg}");
    assert_ne!(msg, parse_msg);
}

#[test]
fn environment_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let p = reference();
    let out = smc(&["simulate", "--config", p.to_str().unwrap(), "--set", "simulation.duration=0.05", "--set", "simulation.dwell=0.01", "--set", "output.run_id=envrun"])
        .env(smc_bench::OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    assert!(dir.path().join("envrun.trace.csv").exists());
}

#[test]
fn seed_flag_changes_the_noise() {
    let dir = tempfile::tempdir().unwrap();
    let p = reference();
    let base = ["simulate", "--config", p.to_str().unwrap(), "--set", "simulation.duration=0.05", "--set", "simulation.dwell=0.01"];
    let read = |id: &str, seed: &str| {
        let mut args = base.to_vec();
        let set = format!("output.run_id={id}");
        args.extend(["--set", &set, "--seed", seed]);
        run_in(dir.path(), &args);
        std::fs::read(dir.path().join(format!("{id}.trace.csv"))).unwrap()
    };
    assert_eq!(read("a", "1"), read("b", "1"));
    assert_ne!(read("c", "1"), read("d", "2"));
}

#[test]
fn benchmark_of_a_controller_against_itself_has_zero_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let p = reference();
    let out = run_in(
        dir.path(),
        &[
            "benchmark",
            "--config",
            p.to_str().unwrap(),
            "--set",
            "benchmark.candidate=terminal",
            "--set",
            "simulation.duration=0.6",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let report = parse_kv(&std::fs::read_to_string(dir.path().join("reference.report")).unwrap()).unwrap();
    assert_eq!(report["delta_energy"].parse::<f64>().unwrap(), 0.0);
    assert_eq!(report["delta_convergence_time"].parse::<f64>().unwrap(), 0.0);
    assert_eq!(report["delta_steady_state_error"].parse::<f64>().unwrap(), 0.0);
    assert!(!report.contains_key("predicted_omega"));
}

#[test]
fn benchmark_favours_energy_saving_and_gap_grows_with_duration() {
    let dir = tempfile::tempdir().unwrap();
    let p = reference();
    let delta = |duration: &str| {
        let set = format!("simulation.duration={duration}");
        let id = format!("output.run_id=d{duration}");
        run_in(dir.path(), &["benchmark", "--config", p.to_str().unwrap(), "--set", &set, "--set", &id]);
        let text = std::fs::read_to_string(dir.path().join(format!("d{duration}.report"))).unwrap();
        parse_kv(&text).unwrap()["delta_energy"].parse::<f64>().unwrap()
    };
    let (half, full) = (delta("0.75"), delta("1.5"));
    assert!(half > 0.0 && full > half, "half {half} full {full}");
    let compare = std::fs::read_to_string(dir.path().join("d1.5.compare.csv")).unwrap();
    assert!(compare.starts_with("t,x_baseline,x_candidate,energy_baseline,energy_candidate\n"));
    assert_eq!(compare.lines().count(), 15001);
}

#[test]
fn chatter_prints_the_prediction() {
    let out = smc(&["chatter", "--mu", "0.0012", "--beta1", "0.85", "--beta2", "0.1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let kv = parse_kv(&String::from_utf8_lossy(&out.stdout)).unwrap();
    let omega: f64 = kv["omega"].parse().unwrap();
    assert!((omega / 520.2 - 1.0).abs() < 1e-3);

    let out = smc(&["chatter", "--beta1", "0.1", "--beta2", "-0.1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tune_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let p = reference();
    let out = run_in(dir.path(), &["tune", "--config", p.to_str().unwrap(), "--grid", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("reference.tune.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let kv = parse_kv(&std::fs::read_to_string(dir.path().join("reference.tune.summary")).unwrap()).unwrap();
    assert_eq!(kv["grid"], "5");
}

#[test]
fn tune_without_improving_pair_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = reference();
    let out = run_in(dir.path(), &["tune", "--config", p.to_str().unwrap(), "--grid", "3", "--set", "tune.slack=1e-6"]);
    assert_eq!(out.status.code(), Some(2));
}
