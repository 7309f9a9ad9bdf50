// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::Command;

use homjump_cli::output::sha256_hex;

fn homjump() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homjump"))
}

fn write_config(dir: &Path, json: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p
}

const CAVITY: &str = r#"{
    "schema_version": 1,
    "source": {"type": "cavity_qed", "g_1": 2, "g_2": 2, "kappa_1": 1, "kappa_2": 10, "gamma_1": 1, "gamma_2": 1},
    "n_trajectories": 300,
    "t_max": 10,
    "base_seed": 11,
    "t_grid": {"start": 0, "stop": 10, "step": 0.5},
    "sweep": {"variable": "kappa_2_ratio", "ratios": [1, 4]},
    "n_list": [50, 100]
}"#;

fn run_ok(args: &[&str]) -> std::process::Output {
    let out = homjump().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "homjump {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn evolve_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CAVITY);
    let out = dir.path().join("out");
    run_ok(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out.join("expectations.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,n1_mean,n1_se,n2_mean,n2_se,e1_mean,e1_se,e2_mean,e2_se,total_mean,total_se"
    );
    assert_eq!(lines.count(), 21);
    assert!(csv.ends_with('\n'));
    let first: Vec<f64> = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 1.0).abs() < 1e-12 && (first[9] - 2.0).abs() < 1e-12);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "evolve");
    assert_eq!(manifest["config"]["base_seed"], 11);
    assert_eq!(
        manifest["files"]["expectations.csv"],
        sha256_hex(csv.as_bytes())
    );
    assert!(manifest["runtime_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn outputs_do_not_depend_on_threads_or_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CAVITY);
    for cmd in ["evolve", "coincidence", "delays"] {
        let mut contents = Vec::new();
        for threads in ["1", "3", "1"] {
            let out = dir
                .path()
                .join(format!("{cmd}-{threads}-{}", contents.len()));
            run_ok(&[
                cmd,
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--threads",
                threads,
            ]);
            let name = match cmd {
                "evolve" => "expectations.csv",
                "coincidence" => "coincidence.csv",
                _ => "delays.csv",
            };
            contents.push(fs::read(out.join(name)).unwrap());
        }
        assert_eq!(contents[0], contents[1], "{cmd}");
        assert_eq!(contents[0], contents[2], "{cmd}");
    }
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CAVITY);
    let out = dir.path().join("out");
    let status = homjump()
        .args([
            "delays",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .env("HOMJUMP_THREADS", "2")
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["threads"], 2);
}

#[test]
fn seed_flag_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CAVITY);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_ok(&[
        "delays",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    run_ok(&[
        "delays",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
        "--seed",
        "999",
    ]);
    assert_ne!(
        fs::read(a.join("delays.csv")).unwrap(),
        fs::read(b.join("delays.csv")).unwrap()
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["base_seed"], 999);
}

#[test]
fn coincidence_rows_follow_ratio_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CAVITY);
    let out = dir.path().join("out");
    run_ok(&[
        "coincidence",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out.join("coincidence.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "1.0");
    assert_eq!(rows[0][6], "1.0");
    assert_eq!(rows[0][4], "0");
    assert_eq!(rows[1][0], "4.0");
}

#[test]
fn scaling_single_entry() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CAVITY.replace("[50, 100]", "[40]"));
    let out = dir.path().join("out");
    run_ok(&[
        "scaling",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out.join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("40,"));
}

#[test]
fn independent_pairs_every_record() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{
        "schema_version": 1,
        "source": {"type": "single_cavity_qed", "g": 1, "kappa": 1, "gamma": 0},
        "n_trajectories": 400,
        "t_max": 60,
        "base_seed": 5,
        "bin_width": 0.5
    }"#;
    let cfg = write_config(dir.path(), json);
    let out = dir.path().join("out");
    run_ok(&[
        "independent",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out.join("delays.csv")).unwrap();
    let total: u64 = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            f[2].parse::<u64>().unwrap() + f[3].parse::<u64>().unwrap()
        })
        .sum();
    // γ = 0 and a long horizon: every record clicks once, so every pair counts
    assert_eq!(total, 400);
}

#[test]
fn short_horizon_gives_empty_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let json = CAVITY.replace("\"t_max\": 10", "\"t_max\": 0.001").replace(
        "\"t_grid\": {\"start\": 0, \"stop\": 10, \"step\": 0.5},",
        "",
    );
    let cfg = write_config(dir.path(), &json);
    let out = dir.path().join("out");
    run_ok(&[
        "delays",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out.join("delays.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",0,0"), "{line}");
    }
}

#[test]
fn failures_exit_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(
        dir.path(),
        &CAVITY.replace("\"schema_version\": 1", "\"schema_version\": 7"),
    );
    let out = homjump()
        .args([
            "evolve",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version"));
    assert!(!dir.path().join("manifest.json").exists());

    let missing = homjump()
        .args([
            "evolve",
            "--config",
            "/nonexistent/cfg.json",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!missing.status.success());

    // output path is an existing regular file
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(dir.path(), CAVITY);
    let out = homjump()
        .args([
            "evolve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            blocker.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let two_atom = write_config(
        dir.path(),
        r#"{"schema_version": 1, "source": {"type": "two_atom", "gamma_1": 1, "gamma_2": 1},
            "n_trajectories": 10, "t_max": 5, "base_seed": 0}"#,
    );
    let out = homjump()
        .args([
            "independent",
            "--config",
            two_atom.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
