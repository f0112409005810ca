use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn compass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn gadget8_default_scenarios() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("g");
    let o = compass(&["gadget8", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["adiabatic", "noisy", "fast"] {
        let rows = csv_rows(&out.join(format!("trajectory_{name}.csv")));
        assert!(rows.len() > 100);
        assert_eq!(rows[0].len(), 17);
    }
    assert!(out.join("trajectories.gp").exists());
    let s = summary(&out);
    let ke = |k: usize| s["scenarios"][k]["residual_ke"].as_f64().unwrap();
    assert_eq!(s["scenarios"][2]["name"], "fast");
    assert!(ke(2) > ke(0), "fast {} vs adiabatic {}", ke(2), ke(0));
    assert!(s["batch"].is_null());
}

#[test]
fn gadget8_noiseless_runs_repeat() {
    let tmp = TempDir::new().unwrap();
    let o = compass(&["gadget8", "--T", "1000", "--no-noise", "--runs", "2", "--out", &out_arg(tmp.path())]);
    assert!(o.status.success());
    let rows = csv_rows(&tmp.path().join("records.csv"));
    assert_eq!(rows.len(), 2);
    // everything but run_id and seed
    for col in 3..7 {
        assert_eq!(rows[0][col], rows[1][col]);
    }
}

#[test]
fn gadget8_noisy_batch_suppresses_isolated_state() {
    let tmp = TempDir::new().unwrap();
    let o = compass(&["gadget8", "--runs", "500", "--noise", "0.02", "--out", &out_arg(tmp.path())]);
    assert!(o.status.success());
    let s = summary(tmp.path());
    let p_s = s["batch"]["p_s"].as_f64().unwrap();
    let p_c = s["batch"]["p_c"].as_f64().unwrap();
    assert_eq!(s["batch"]["runs"], 500);
    assert!(p_s < p_c, "p_s {p_s} p_C {p_c}");
}

#[test]
fn bench_noiseless_is_bimodal() {
    let tmp = TempDir::new().unwrap();
    let o = compass(&[
        "bench", "--chimera", "2x2", "--instances", "20", "--runs", "2", "--no-noise", "--out", &out_arg(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&tmp.path().join("success.csv"));
    assert_eq!(rows.len(), 20);
    for r in &rows {
        assert!(r[1] == "0" || r[1] == "1", "{r:?}");
    }
    let s = summary(tmp.path());
    let hits = rows.iter().filter(|r| r[1] == "1").count();
    assert_eq!(s["instances_with_success"].as_u64().unwrap() as usize, hits);
    for f in ["records.csv", "oracle.csv", "histogram.csv", "histogram.gp"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
}

#[test]
fn success_flags_follow_from_csvs() {
    let tmp = TempDir::new().unwrap();
    let o = compass(&[
        "bench", "--chimera", "1x2", "--instances", "6", "--runs", "3", "--T", "100", "--noise-amp", "0.01",
        "--out", &out_arg(tmp.path()),
    ]);
    assert!(o.status.success());
    let oracle = csv_rows(&tmp.path().join("oracle.csv"));
    for r in csv_rows(&tmp.path().join("records.csv")) {
        let id: usize = r[0].parse().unwrap();
        let e: f64 = r[3].parse().unwrap();
        let g: f64 = oracle[id][1].parse().unwrap();
        assert_eq!(r[4], oracle[id][1]);
        assert_eq!(r[5], if e <= g { "1" } else { "0" });
    }
}

#[test]
fn records_independent_of_worker_count() {
    let tmp = TempDir::new().unwrap();
    let mut files = Vec::new();
    for workers in ["1", "4"] {
        let out = tmp.path().join(workers);
        let o = compass(&[
            "bench", "--chimera", "1x2", "--instances", "5", "--runs", "4", "--T", "50", "--noise-amp", "0.01",
            "--workers", workers, "--out", &out_arg(&out),
        ]);
        assert!(o.status.success());
        files.push(fs::read(out.join("records.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn empty_instance_set_is_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("none");
    let o = compass(&["bench", "--instances", "0", "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(compass(&["bench", "--chimera", "3"]).status.code(), Some(1));
    assert_eq!(compass(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(compass(&["--help"]).status.code(), Some(0));
    let tmp = TempDir::new().unwrap();
    let o = compass(&["bench", "--gadget", "--dt", "0", "--out", &out_arg(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn divergence_exit_code() {
    let tmp = TempDir::new().unwrap();
    let o = compass(&[
        "bench", "--gadget", "--dt", "0.5", "--bx", "1e5", "--T", "10", "--out", &out_arg(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
}

#[test]
fn exact_gadget_and_single_spin() {
    let o = compass(&["exact", "--gadget"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "instance_id,ground_energy,degeneracy\n0,-8,17\n");

    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("one.txt");
    fs::write(&file, "n 1\nh 0 1\n").unwrap();
    let o = compass(&["exact", "--input", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().ends_with("0,-1,1\n"));
}

#[test]
fn exact_caps_exit_3() {
    let o = compass(&["exact", "--chimera", "6x6", "--instances", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
    let o = compass(&["exact", "--chimera", "2x2", "--instances", "1", "--brute"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gen_round_trips_through_exact() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("inst");
    let o = compass(&["gen", "--chimera", "2x2", "--instances", "3", "--seed", "9", "--out", &out_arg(&dir)]);
    assert!(o.status.success());
    let mut files: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), 3);

    let mut args = vec!["exact".to_string(), "--input".to_string()];
    args.extend(files.iter().map(|p| p.to_str().unwrap().to_string()));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let from_files = compass(&args);
    let generated = compass(&["exact", "--chimera", "2x2", "--instances", "3", "--seed", "9"]);
    assert!(from_files.status.success() && generated.status.success());
    assert_eq!(from_files.stdout, generated.stdout);
}

#[test]
fn sa_json_output() {
    let tmp = TempDir::new().unwrap();
    let o = compass(&["sa", "--gadget", "--runs", "200", "--format", "json", "--out", &out_arg(tmp.path())]);
    assert!(o.status.success());
    let records: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("records.json")).unwrap()).unwrap();
    assert_eq!(records.len(), 200);
    assert_eq!(records[0]["projected"].as_array().unwrap().len(), 8);
    let s = summary(tmp.path());
    assert_eq!(s["solver"], "sa");
    assert!(s["isolated_cluster"]["p_s"].as_f64().is_some());
}
