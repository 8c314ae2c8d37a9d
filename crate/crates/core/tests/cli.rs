mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::asset;

fn epigrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epigrid"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn validate_exit_codes() {
    let ok = epigrid(&["validate", path(&asset("scenarios/small_space.scn"))]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("4 persons, 12 walkable of 16 tiles"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    std::fs::write(&bad, "[grid]\nIS\n[params]\nbeta=1.5\n").unwrap();
    assert_eq!(epigrid(&["validate", path(&bad)]).status.code(), Some(1));
    let ragged = dir.path().join("ragged.scn");
    std::fs::write(&ragged, "[grid]\nIS\nS\n").unwrap();
    let out = epigrid(&["validate", path(&ragged)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let missing = dir.path().join("absent.scn");
    assert_eq!(
        epigrid(&["validate", path(&missing)]).status.code(),
        Some(2)
    );
}

#[test]
fn argument_errors() {
    assert_eq!(epigrid(&["--help"]).status.code(), Some(0));
    assert_eq!(epigrid(&["frobnicate"]).status.code(), Some(1));
    let s = asset("scenarios/small_space.scn");
    assert_eq!(
        epigrid(&["simulate", path(&s), "--policy", "greedy"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn simulate_is_byte_identical_across_invocations() {
    let s = asset("scenarios/small_space.scn");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = epigrid(&[
            "simulate",
            path(&s),
            "--seed",
            "5",
            "--rounds",
            "2",
            "--events",
            "--out",
            path(dir.path()),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let files = read_dir_sorted(a.path());
    assert_eq!(files, read_dir_sorted(b.path()));
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "round_0.csv",
            "round_0_events.jsonl",
            "round_0_planner.jsonl",
            "round_1.csv",
            "round_1_events.jsonl",
            "round_1_planner.jsonl"
        ]
    );
    let traj = String::from_utf8(files[0].1.clone()).unwrap();
    let mut lines = traj.lines();
    assert_eq!(
        lines.next(),
        Some("step,S,E,I,R,D,cum_infections,cum_deaths")
    );
    assert_eq!(lines.next(), Some("0,3,0,1,0,0,1,0"));
    assert_eq!(traj.lines().count(), 17);
    let planner = String::from_utf8(files[2].1.clone()).unwrap();
    assert_eq!(planner.lines().count(), 15);
    let first: serde_json::Value = serde_json::from_str(planner.lines().next().unwrap()).unwrap();
    for key in ["step", "chosen_action", "root_visits", "per_action"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn experiment_output_is_reproducible() {
    let spec = asset("experiments/rooms.exp");
    let args = ["experiment", path(&spec), "--runs", "1", "--seed", "3"];
    let a = epigrid(&args);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, epigrid(&args).stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("simulation,N,masks,vaccines,walkable,total_tiles,density,pred_pos_pct,d_avg")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    let densities: Vec<&str> = rows.iter().map(|r| r[6]).collect();
    assert_eq!(
        densities,
        ["0.33", "0.33", "0.33", "0.25", "0.25", "0.25", "0.57", "0.57", "0.38", "0.38"]
    );
}

#[test]
fn benchmark_json_and_file_output() {
    let spec = asset("benchmarks/schools.bench");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let r = epigrid(&[
        "benchmark",
        path(&spec),
        "--format",
        "json",
        "--out",
        path(&out),
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let rows: Vec<epigrid::harness::SchoolMetrics> =
        serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!((rows[0].simulations, rows[0].n_est), (13, 104));
    assert_eq!((rows[3].simulations, rows[3].n_est), (21, 357));

    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(
        epigrid(&["benchmark", path(&spec), "--out", path(&unwritable)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oracle_subcommands() {
    let ode = epigrid(&["oracle", "ode", "--dt", "1", "--steps", "1"]);
    assert_eq!(ode.status.code(), Some(0));
    let text = String::from_utf8(ode.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,S,E,I,R,D");
    assert_eq!(lines[1], "0,99,0,1,0,0");
    let s1: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!((s1 - (99.0 - 0.7722)).abs() < 1e-12);

    let pair = asset("scenarios/static_pair.scn");
    let en = epigrid(&["oracle", "enumerate", path(&pair), "--horizon", "1"]);
    assert_eq!(en.status.code(), Some(0));
    let dist: std::collections::BTreeMap<String, f64> = serde_json::from_slice(&en.stdout).unwrap();
    assert!((dist["0,1,1,0,0"] + dist["0,1,0,1,0"] + dist["0,1,0,0,1"] - 0.78).abs() < 1e-12);

    let big = asset("scenarios/small_space.scn");
    assert_eq!(
        epigrid(&["oracle", "enumerate", path(&big), "--horizon", "1"])
            .status
            .code(),
        Some(1)
    );
}
