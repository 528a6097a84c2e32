// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ads_changepoint::basis::{reconstruct, TimeGrid};
use ads_changepoint::simlab::{gen_sequence, Noise, SimConfig};
use serde_json::Value;
use tempfile::TempDir;

fn adscp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adscp")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = adscp(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut args = vec!["simulate", "--out", s(&path)];
    args.extend_from_slice(extra);
    ok(&args);
    path
}

/// Writes curves `Y_i(t_j)` for the sample of `cfg` on `m` equispaced points.
fn write_raw(path: &Path, cfg: &SimConfig, m: usize) {
    let grid = TimeGrid::uniform(m).unwrap();
    let y = reconstruct(&gen_sequence(cfg).unwrap(), &grid);
    let mut text = String::from("t");
    for t in grid.points() {
        text.push_str(&format!(",{t:.16e}"));
    }
    text.push('\n');
    for row in y.row_iter() {
        let vals: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        text.push_str(&vals.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn simulate_writes_coefficients_truth_and_manifest() {
    let dir = TempDir::new().unwrap();
    let csv = simulate(&dir, "sim.csv", &["--n", "300", "--change-points", "100,200", "--seed", "5"]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("c1,c2,"));
    assert_eq!(text.lines().count(), 301);
    let truth: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sim.truth.json")).unwrap()).unwrap();
    assert_eq!(truth["change_points"], serde_json::json!([100, 200]));
    assert_eq!(truth["manifest"]["seed"], 5);
    assert!(dir.path().join("sim.csv.manifest.json").exists());
}

#[test]
fn test_reports_probability_and_consistent_decision() {
    let dir = TempDir::new().unwrap();
    let csv = simulate(&dir, "h0.csv", &["--u", "0", "--seed", "11"]);
    let v = json(&ok(&["test", s(&csv)]));
    let p = v["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert_eq!(v["reject"].as_bool().unwrap(), p < 0.05);
    assert_eq!(v["direction"].as_array().unwrap().len(), 21);
    assert_eq!(v["manifest"]["command"], "test");
}

#[test]
fn detect_finds_both_changes() {
    let dir = TempDir::new().unwrap();
    let csv = simulate(&dir, "two.csv", &["--n", "300", "--change-points", "100,200", "--seed", "21"]);
    let s_path = dir.path().join("S.csv");
    let v = json(&ok(&["detect", s(&csv), "--emit-s", s(&s_path)]));
    let locs: Vec<i64> = v["locations"].as_array().unwrap().iter().map(|x| x.as_i64().unwrap()).collect();
    assert_eq!(locs.len(), 2, "{v}");
    assert!((locs[0] - 100).abs() <= 30 && (locs[1] - 200).abs() <= 30, "{locs:?}");
    assert_eq!(v["k_hat"], 2);
    let series = std::fs::read_to_string(&s_path).unwrap();
    assert!(series.starts_with("i,S\n1,"));
    assert!(dir.path().join("S.csv.manifest.json").exists());
}

#[test]
fn detect_parameter_overrides_are_recorded() {
    let dir = TempDir::new().unwrap();
    let csv = simulate(&dir, "one.csv", &["--seed", "2"]);
    let v = json(&ok(&["detect", s(&csv), "--alpha-n", "20", "--tau2", "0.4", "--c-tilde", "0.2", "--tau1", "0.6", "--c-n", "0.01"]));
    let p = &v["manifest"]["params"];
    assert_eq!(p["mpulse"]["alpha_n"], 20);
    assert_eq!(p["mpulse"]["tau2"], 0.4);
    assert_eq!(p["mpulse"]["c_tilde"], 0.2);
    assert_eq!(p["tau1"], 0.6);
    assert_eq!(p["c_n"], 0.01);
}

#[test]
fn reduce_writes_one_reduced_column_for_a_clear_change() {
    let dir = TempDir::new().unwrap();
    let csv = simulate(&dir, "one.csv", &["--u", "0.2", "--seed", "4"]);
    let (out, model, scree) = (dir.path().join("r.csv"), dir.path().join("m.json"), dir.path().join("scree.csv"));
    ok(&["reduce", s(&csv), "--out", s(&out), "--model", s(&model), "--scree", s(&scree)]);
    let reduced = std::fs::read_to_string(&out).unwrap();
    assert!(reduced.starts_with("f1\n"));
    assert_eq!(reduced.lines().count(), 201);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(m["q_hat"], 1);
    assert_eq!(m["eigenvectors"].as_array().unwrap().len(), 21);
    assert_eq!(m["reduced"].as_array().unwrap().len(), 200);
    assert_eq!(std::fs::read_to_string(&scree).unwrap().lines().count(), 22);
}

#[test]
fn reduce_without_signal_exits_four() {
    let dir = TempDir::new().unwrap();
    let csv = simulate(&dir, "h0.csv", &["--u", "0", "--seed", "8"]);
    let out = adscp(&["reduce", s(&csv), "--out", s(&dir.path().join("r.csv"))]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no change signal"));
    assert!(!dir.path().join("r.csv").exists());
}

#[test]
fn raw_grid_pipeline_matches_coefficients() {
    let dir = TempDir::new().unwrap();
    let cfg = SimConfig::new(200, vec![100], 0.2, 20, Noise::Gaussian, 9).unwrap();
    let raw = dir.path().join("raw.csv");
    write_raw(&raw, &cfg, 101);
    let coeffs = dir.path().join("coeffs.csv");
    ok(&["project", s(&raw), "--smooth", "21", "--out", s(&coeffs)]);

    let from_raw = json(&ok(&["test", s(&raw), "--smooth", "21"]));
    let from_coeffs = json(&ok(&["test", s(&coeffs)]));
    assert_eq!(
        from_raw["statistic"].as_f64().unwrap().to_bits(),
        from_coeffs["statistic"].as_f64().unwrap().to_bits()
    );

    // The projection recovers the generating coefficients.
    let original = gen_sequence(&cfg).unwrap();
    let text = std::fs::read_to_string(&coeffs).unwrap();
    for (i, line) in text.lines().skip(1).enumerate() {
        for (j, f) in line.split(',').enumerate() {
            let v: f64 = f.parse().unwrap();
            assert!((v - original.coeffs()[(i, j)]).abs() < 1e-8);
        }
    }

    let (r1, r2) = (dir.path().join("r1.csv"), dir.path().join("r2.csv"));
    ok(&["reduce", s(&raw), "--smooth", "21", "--out", s(&r1)]);
    let direct = dir.path().join("direct.csv");
    ok(&["simulate", "--u", "0.2", "--seed", "9", "--out", s(&direct)]);
    ok(&["reduce", s(&direct), "--out", s(&r2)]);
    let parse = |p: &Path| -> Vec<f64> {
        std::fs::read_to_string(p).unwrap().lines().skip(1).map(|l| l.parse().unwrap()).collect()
    };
    let (a, b) = (parse(&r1), parse(&r2));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8));
}

#[test]
fn raw_grid_accepts_labels_and_day_numbers() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("days.csv");
    let mut text = String::from("t");
    for d in 1..=365 {
        text.push_str(&format!(",{d}"));
    }
    text.push('\n');
    for i in 0..40 {
        text.push_str(&format!("year{i}"));
        for d in 1..=365 {
            let t = (d - 1) as f64 / 364.0;
            let level = if i < 20 { 1.0 } else { 0.0 };
            let wiggle = ((i * 7 + d) % 13) as f64 / 13.0 - 0.5;
            text.push_str(&format!(",{}", level + (2.0 * std::f64::consts::PI * t).sin() + 0.3 * wiggle));
        }
        text.push('\n');
    }
    std::fs::write(&path, text).unwrap();
    let v = json(&ok(&["test", s(&path), "--smooth", "5"]));
    assert!(v["statistic"].as_f64().unwrap().is_finite());
}

#[test]
fn data_errors_exit_two_with_line_numbers() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = adscp(&["test", s(&empty)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "c1,c2,c3\n1,2,3\n1,x,3\n").unwrap();
    let out = adscp(&["test", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));

    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "t,0,0.5,1\n1,2,3\n1,2\n").unwrap();
    let out = adscp(&["test", s(&ragged), "--smooth", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let short = dir.path().join("short.csv");
    std::fs::write(&short, "c1\n1\n2\n3\n").unwrap();
    assert_eq!(adscp(&["test", s(&short)]).status.code(), Some(2));
}

#[test]
fn constant_data_exits_three() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("flat.csv");
    let mut text = String::from("c1,c2,c3\n");
    for _ in 0..40 {
        text.push_str("1,2,3\n");
    }
    std::fs::write(&path, text).unwrap();
    let out = adscp(&["test", s(&path)]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_table_one_has_fourteen_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t1.csv");
    ok(&["bench", "--table", "1", "--reps", "100", "--seed", "1", "--out", s(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("table,noise,method,n,K,D_c,u,reps,rate"));
    assert_eq!(lines.count(), 14);
    assert!(dir.path().join("t1.csv.manifest.json").exists());
}

#[test]
fn replay_reproduces_outputs() {
    let dir = TempDir::new().unwrap();
    let csv = simulate(&dir, "two.csv", &["--n", "300", "--change-points", "100,200", "--seed", "13"]);
    let out = dir.path().join("detect.json");
    ok(&["detect", s(&csv), "--out", s(&out)]);
    let first = std::fs::read(&out).unwrap();
    std::fs::remove_file(&out).unwrap();
    // The JSON output embeds its manifest.
    let copy = dir.path().join("copy.json");
    std::fs::write(&copy, &first).unwrap();
    ok(&["replay", s(&copy)]);
    assert_eq!(std::fs::read(&out).unwrap(), first);

    let original = std::fs::read(&csv).unwrap();
    std::fs::remove_file(&csv).unwrap();
    ok(&["replay", s(&dir.path().join("two.csv.manifest.json"))]);
    assert_eq!(std::fs::read(&csv).unwrap(), original);
}
