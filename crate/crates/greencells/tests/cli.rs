//! End-to-end checks of the `greencells` binary: the generate/run/oracle/
//! partition subcommands, their file outputs, and failure exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn greencells(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greencells"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn generate_small(dir: &Path) {
    let out = greencells(
        &[
            "generate",
            "--out",
            "scenario.json",
            "--trace-out",
            "trace.json",
            "--stations",
            "2",
            "--cells-per-station",
            "2",
            "--grid-w",
            "10",
            "--grid-h",
            "10",
            "--radius",
            "9",
            "--seed",
            "3",
            "--days",
            "1",
            "--peak",
            "60",
            "--trough",
            "0.2",
        ],
        dir,
    );
    assert_ok(&out);
    assert!(dir.join("scenario.json").exists());
    assert!(dir.join("trace.json").exists());
}

#[test]
fn generate_run_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    generate_small(tmp.path());

    let net = greencells::network::Network::load_json(tmp.path().join("scenario.json")).unwrap();
    assert_eq!(net.nr_cells(), 4);
    greencells::traffic::DemandTrace::load_json(tmp.path().join("trace.json"), &net).unwrap();

    let out = greencells(
        &[
            "run",
            "--scenario",
            "scenario.json",
            "--trace",
            "trace.json",
            "--controller",
            "allon",
            "--controller",
            "night",
            "--seeds",
            "1,2",
            "--out-dir",
            "results",
        ],
        tmp.path(),
    );
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("allon"));
    assert!(stdout.contains("night"));
    assert!(tmp.path().join("results/results.csv").exists());
    for controller in ["allon", "night"] {
        for seed in ["1", "2"] {
            let log = tmp
                .path()
                .join(format!("results/schedule_{controller}_{seed}.csv"));
            assert!(log.exists(), "{log:?} missing");
        }
    }
}

#[test]
fn generate_is_byte_identical_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate_small(a.path());
    generate_small(b.path());
    for name in ["scenario.json", "trace.json"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name} differs between identical generate invocations"
        );
    }
}

#[test]
fn oracle_reports_optimum() {
    let tmp = tempfile::tempdir().unwrap();
    generate_small(tmp.path());
    let out = greencells(
        &[
            "oracle",
            "--scenario",
            "scenario.json",
            "--trace",
            "trace.json",
            "--horizon",
            "120",
            "--t0",
            "2",
            "--schedule-out",
            "oracle.csv",
        ],
        tmp.path(),
    );
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("optimal expected reward"), "{stdout}");
    assert!(stdout.contains("period   2"), "{stdout}");
    let schedule = std::fs::read_to_string(tmp.path().join("oracle.csv")).unwrap();
    let mut lines = schedule.lines();
    assert_eq!(
        lines.next(),
        Some("period_index,t_minutes,actions,energy,penalty")
    );
    assert!(lines.next().unwrap().starts_with("2,120,"), "{schedule}");
    assert_eq!(schedule.lines().count(), 1 + 2);
}

#[test]
fn oracle_refuses_oversized_spaces() {
    let tmp = tempfile::tempdir().unwrap();
    generate_small(tmp.path());
    let out = greencells(
        &[
            "oracle",
            "--scenario",
            "scenario.json",
            "--trace",
            "trace.json",
            "--horizon",
            "1440",
            "--max-bits",
            "10",
        ],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("decision space"));
}

#[test]
fn partition_inspection_and_exports() {
    let tmp = tempfile::tempdir().unwrap();
    generate_small(tmp.path());
    let out = greencells(
        &[
            "partition",
            "--scenario",
            "scenario.json",
            "--max-cells",
            "2",
            "--cells-out",
            "cells.csv",
        ],
        tmp.path(),
    );
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("partitions"));
    let cells = std::fs::read_to_string(tmp.path().join("cells.csv")).unwrap();
    assert!(cells.starts_with("partition_id,cell_id\n"));
    assert_eq!(cells.lines().count(), 1 + 4);
}

#[test]
fn missing_scenario_is_a_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let out = greencells(
        &[
            "run",
            "--scenario",
            "nope.json",
            "--trace",
            "nope.json",
            "--controller",
            "allon",
        ],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn invalid_night_window_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    generate_small(tmp.path());
    let out = greencells(
        &[
            "run",
            "--scenario",
            "scenario.json",
            "--trace",
            "trace.json",
            "--controller",
            "night",
            "--night-start",
            "500",
            "--night-end",
            "100",
        ],
        tmp.path(),
    );
    assert!(!out.status.success());
}
