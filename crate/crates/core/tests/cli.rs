use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn weyllab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyllab"))
        .args(args)
        .env_remove("WEYLLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn sine_potential(n: usize) -> String {
    let mut s = format!("0 1 {n} compact cubic\n");
    for k in 0..n {
        let x = k as f64 / (n - 1) as f64;
        s.push_str(&format!("{:.17e}\n", (std::f64::consts::PI * x).sin()));
    }
    s
}

#[test]
fn jacobi_roundtrip_passes() {
    let out = weyllab(&["jacobi", "roundtrip", "--n", "8", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "jacobi roundtrip");
    assert!(v["result"]["max_op_error"].as_f64().unwrap() < 1e-10);
    assert!(v["result"]["max_cf_error"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["verdict"]["passed"], true);
    assert_eq!(v["config"]["seed"], 1);
}

#[test]
fn harmonic_trace_formula_example() {
    let out = weyllab(&["xi", "harmonic"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let est = v["result"]["estimate"]["extrapolated"].as_f64().unwrap();
    assert!((est + 1.0).abs() < 2e-2, "{est}");
    assert_eq!(v["result"]["estimate"]["alphas"].as_array().unwrap().len(), 3);
}

#[test]
fn failed_check_exits_one() {
    let out = weyllab(&["xi", "harmonic", "--alpha-schedule", "0.5,0.4", "--jmax", "5", "--tol", "1e-12"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"]["passed"], false);
}

#[test]
fn missing_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("report.json");
    let out = weyllab(&[
        "schrod",
        "eig",
        "--potential",
        "/definitely/not/here.txt",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!target.exists());
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none(), "no partial output left behind");
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(weyllab(&["jacobi", "roundtrip", "--n", "x"]).status.code(), Some(2));
    assert_eq!(weyllab(&["nonsense"]).status.code(), Some(2));
    assert_eq!(weyllab(&["xi", "harmonic", "--alpha-schedule", "1:0:geometric:3"]).status.code(), Some(2));
    assert_eq!(weyllab(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_deterministic() {
    let a = weyllab(&["jacobi", "roundtrip", "--n", "6", "--count", "3", "--seed", "7"]);
    let b = weyllab(&["jacobi", "roundtrip", "--n", "6", "--count", "3", "--seed", "7"]);
    let c = weyllab(&["jacobi", "roundtrip", "--n", "6", "--count", "3", "--seed", "8"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_output_and_out_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("table.csv");
    let out = weyllab(&["--format", "csv", "--out", target.to_str().unwrap(), "jacobi", "roundtrip", "--count", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&target).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,op_error,cf_error"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn inputs_are_digested() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "v.txt", "0 1 4 constant:0 linear\n0\n0\n0\n0\n");
    let out = weyllab(&["schrod", "eig", "--potential", &p, "--count", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let digest = v["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    let ev: Vec<f64> = v["result"]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (j, e) in ev.iter().enumerate() {
        let exact = ((j + 1) as f64 * std::f64::consts::PI).powi(2);
        assert!((e - exact).abs() < 1e-7 * exact, "{e} vs {exact}");
    }
}

#[test]
fn m_function_of_free_potential() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "zero.txt", "0 1 4 compact linear\n0 0 0 0\n");
    let out = weyllab(&["schrod", "m", "--potential", &p, "--z", "0,1", "--kappa-range", "1:4:4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["conventions"]["branch"].is_string());
    let values = v["result"]["values"].as_array().unwrap();
    assert_eq!(values.len(), 5);
    // m(z) = -sqrt(-z), so m(-k^2) = -k.
    for (row, k) in values[1..].iter().zip([1.0, 2.0, 3.0, 4.0]) {
        let m = row["weyl"]["value"]["Finite"][0].as_f64().unwrap();
        assert!((m + k).abs() < 1e-9, "{m} vs {}", -k);
    }
}

#[test]
fn a_function_forward_then_invert() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "sine.txt", &sine_potential(513));
    let fwd = weyllab(&["afunc", "forward", "--potential", &p, "--n", "128"]);
    assert_eq!(fwd.status.code(), Some(0));
    let v = json(&fwd);
    let slice: Vec<f64> = v["result"]["slice"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(slice.len(), 129);
    let mut text = String::new();
    for (i, a) in slice.iter().enumerate() {
        text.push_str(&format!("{:.17e} {:.17e}\n", i as f64 / 128.0, a));
    }
    let s = write(&dir, "slice.txt", &text);
    let inv = weyllab(&["afunc", "invert", "--slice", &s]);
    assert_eq!(inv.status.code(), Some(0));
    let back = json(&inv)["result"]["potential"].as_array().unwrap().clone();
    let worst = back
        .iter()
        .enumerate()
        .map(|(j, v)| (v.as_f64().unwrap() - (std::f64::consts::PI * j as f64 / 128.0).sin()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn bmcheck_recovers_agreement_length() {
    let dir = TempDir::new().unwrap();
    let n = 2001;
    let (a, w) = (0.5, 0.1);
    let mut bumped = format!("0 1 {n} compact cubic\n");
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64 - a;
        let v = if t > 0.0 && t < w { 16.0 / w.powi(4) * t * t * (w - t) * (w - t) } else { 0.0 };
        bumped.push_str(&format!("{v:.17e}\n"));
    }
    let v2 = write(&dir, "bump.txt", &bumped);
    let v1 = write(&dir, "zero.txt", "0 1 4 compact linear\n0 0 0 0\n");
    let out = weyllab(&["afunc", "bmcheck", "--v1", &v1, "--v2", &v2, "--expect", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let a_hat = v["result"]["check"]["verdict"]["a_hat"].as_f64().unwrap();
    assert!((a_hat - 0.5).abs() < 0.025, "{a_hat}");
}

#[test]
fn afunc_measure_free_interval() {
    let dir = TempDir::new().unwrap();
    let mut text = String::new();
    for n in 1..=400 {
        let l = (n as f64 * std::f64::consts::PI).powi(2);
        text.push_str(&format!("{l:.17e} {:.17e}\n", 2.0 * l));
    }
    let m = write(&dir, "free.txt", &text);
    let out = weyllab(&["afunc", "measure", "--measure", &m, "--expect", "0", "--tol", "5e-2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["verdict"]["value"].as_f64().unwrap() < 1e-6);
}

#[test]
fn rankone_sweep_slope() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "a.txt", "2 1 0\n1 3 1\n0 1 5\n");
    let phi = write(&dir, "phi.txt", "1 1 1\n");
    let out = weyllab(&["rankone", "sweep", "--matrix", &m, "--phi", &phi]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let slope = v["result"]["report"]["fit"]["slope"].as_f64().unwrap();
    assert!((slope + 1.0).abs() < 0.1);
    assert_eq!(v["result"]["report"]["steps"].as_array().unwrap().len(), 7);
}

#[test]
fn krein_shift_between_matrices() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "1 0\n0 2\n");
    let b = write(&dir, "b.txt", "1.5 0\n0 2\n");
    let out = weyllab(&["xi", "shift", "--a", &a, "--b", &b]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["result"]["xi_l1"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn periodic_bands_and_trace_sum() {
    let dir = TempDir::new().unwrap();
    let n = 257;
    let mut text = format!("0 1 {n} periodic cubic\n");
    for k in 0..n {
        let x = k as f64 / (n - 1) as f64;
        text.push_str(&format!("{:.17e}\n", 2.0 * (2.0 * std::f64::consts::PI * x).cos()));
    }
    let p = write(&dir, "mathieu.txt", &text);
    let out = weyllab(&["xi", "periodic", "--potential", &p, "--jmax", "6", "--y", "0.3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let bands = weyllab(&["schrod", "bands", "--potential", &p, "--jmax", "3", "--y", "0,0.5"]);
    assert_eq!(bands.status.code(), Some(0));
    assert_eq!(json(&bands)["result"]["band_edges"].as_array().unwrap().len(), 7);
}

#[test]
fn heat_defect_of_free_line() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "zero.txt", "-5 5 4 compact linear\n0 0 0 0\n");
    let out = weyllab(&["schrod", "heat", "--potential", &p, "--x", "0", "--t", "0.01,0.02"]);
    assert_eq!(out.status.code(), Some(0));
    for d in json(&out)["result"]["defects"].as_array().unwrap() {
        assert!((d["value"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    }
}

#[test]
fn jacobi_strip_from_measure_file() {
    let dir = TempDir::new().unwrap();
    // Two atoms at ±1 with equal weight: b = (0, 0), a_1 = 1.
    let m = write(&dir, "mu.txt", "-1 0.5\n1 0.5\n");
    let out = weyllab(&["jacobi", "strip", "--measure", &m, "--depth", "2", "--route", "both"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    for rec in v["result"]["recovered"].as_array().unwrap() {
        assert!((rec["a"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(rec["b"][0].as_f64().unwrap().abs() < 1e-12);
    }
    assert!(Path::new(&m).exists());
}
