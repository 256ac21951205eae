use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hydrocs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrocs")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn sidecar(csv: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap()
}

const SMALL: &str = "rho:0:5:6,phi:0:6:4,z:-2:2:3";

#[test]
fn closed_ar_density_peaks_near_omega() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ar.csv");
    let o = hydrocs(&[
        "density", "--omega", "4", "--rep", "ar", "--evaluator", "closed",
        "--grid", "rho:0:12:49,phi:0:6.2832:64,z:-4:4:17", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = sidecar(&out);
    let rho = s["summary"]["fit"]["report"]["peak"][0].as_f64().unwrap();
    // the exact peak sits at 3.46; the asymptotic ring is at |ω| = 4
    assert!((rho - 4.0).abs() < 0.6, "{rho}");
    let phi = s["summary"]["fit"]["report"]["peak"][1].as_f64().unwrap();
    assert!((phi - std::f64::consts::PI).abs() < 1e-3);
    assert_eq!(s["evaluator"], "closed");
    assert_eq!(s["points"], 49 * 64 * 17);
}

#[test]
fn vacuum_peaks_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("vac.csv");
    let o = hydrocs(&["density", "--omega", "0", "--grid", SMALL, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let s = sidecar(&out);
    let p = &s["summary"]["peak_sample"];
    assert_eq!(p[0].as_f64().unwrap(), 0.0);
    assert_eq!(p[2].as_f64().unwrap(), 0.0);
    // e^{-2r}/π for the AR ground state
    let d = s["summary"]["max_density"].as_f64().unwrap();
    assert!((d - 1.0 / std::f64::consts::PI).abs() < 1e-14);
}

#[test]
fn csv_layout_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, threads) in [(&a, "1"), (&b, "2")] {
        let o = hydrocs(&[
            "--threads", threads, "density", "--omega", "3@0.5", "--eta", "0.3@1", "--grid", SMALL,
            "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    let mut lines = ta.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,re,im,density"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6 * 4 * 3);
    for r in &rows {
        assert!((r[3] * r[3] + r[4] * r[4] - r[5]).abs() <= 1e-15 * r[5].max(1e-300));
    }
    assert_eq!(rows[1][2], 0.0);
    assert_eq!(rows[3][1], 2.0);
}

#[test]
fn pr_gaussian_with_series_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pr.csv");
    let o = hydrocs(&[
        "density", "--omega", "4", "--rep", "pr", "--evaluator", "gaussian", "--reference", "series",
        "--grid", "rho:0.5:50:40,phi:1.6:4.7:41,z:-15:15:21", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let s = sidecar(&out);
    let l2 = s["summary"]["reference_l2"].as_f64().unwrap();
    assert!(l2.is_finite() && l2 > 0.0);
    // the Gaussian itself peaks on ρ = |ω|²
    let rho = s["summary"]["fit"]["report"]["peak"][0].as_f64().unwrap();
    assert!((rho - 16.0).abs() < 0.1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("relative L2 density mismatch vs series"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    for args in [
        vec!["density", "--rep", "pr", "--evaluator", "closed", "--grid", SMALL, "--out", out],
        vec!["density", "--eta", "0.3", "--rep", "pr", "--evaluator", "gaussian", "--grid", SMALL, "--out", out],
        vec!["density", "--omega", "0.5", "--evaluator", "gaussian", "--grid", SMALL, "--out", out],
        vec!["density", "--eta", "1.5", "--grid", SMALL, "--out", out],
        vec!["density", "--grid", "rho:0:1:1,phi:0:1:2,z:0:1:2", "--out", out],
        vec!["density", "--grid", "a:0:1:2,b:0:1:2,c:0:1:2", "--out", out],
        vec!["density", "--omega", "4@x", "--grid", SMALL, "--out", out],
        vec!["density", "--grid", SMALL],
        vec!["diagnose", "--family", "perelomov-o21", "--xi", "1.2", "--sweep", "10"],
        vec!["diagnose", "--family", "nope"],
        vec!["saddle-demo", "--lambda", "-3"],
        vec!["verify", "--thresholds", "/nonexistent/thresholds.toml"],
        vec!["--threads", "0", "verify", "--suite", "saddle"],
    ] {
        let o = hydrocs(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    // far beyond the series term budget
    let o = hydrocs(&["density", "--omega", "1e5", "--grid", SMALL, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = hydrocs(&["verify", "--suite", "saddle", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["suite"], "saddle");
    assert_eq!(r["pass"], true);
    assert!(r["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"].as_str().unwrap().contains("Stirling")));

    // a stricter thresholds file must turn the same run into a failure
    let strict = hydrocs::verify::DEFAULT_THRESHOLDS.replace("stirling_scale = 0.1", "stirling_scale = 0.05");
    assert_ne!(strict, hydrocs::verify::DEFAULT_THRESHOLDS);
    let tpath = dir.path().join("strict.toml");
    std::fs::write(&tpath, strict).unwrap();
    let o = hydrocs(&["verify", "--suite", "saddle", "--thresholds", tpath.to_str().unwrap()]);
    assert_eq!(code(&o), 1);

    let o = hydrocs(&["verify", "--suite", "cs"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = hydrocs(&["verify", "--suite", "specfun"]);
    assert_eq!(code(&o), 0);
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

fn decreasing(v: &[String]) -> bool {
    let x: Vec<f64> = v.iter().map(|s| s.parse().unwrap()).collect();
    x.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn diagnose_tables() {
    let o = hydrocs(&["diagnose", "--family", "perelomov-o3", "--sweep", "10:1000:5"]);
    assert_eq!(code(&o), 0);
    let t = String::from_utf8(o.stdout).unwrap();
    assert!(decreasing(&column(&t, "ratio3_minus_1")));
    assert!(decreasing(&column(&t, "overlap_sq")));

    let o = hydrocs(&["diagnose", "--family", "bg", "--sweep", "1:100:5"]);
    assert_eq!(code(&o), 0);
    let t = String::from_utf8(o.stdout).unwrap();
    assert!(decreasing(&column(&t, "ratio3_minus_1")));

    let o = hydrocs(&[
        "diagnose", "--family", "ghcs", "--alphas=-3,2", "--rhos", "1.5", "--xi", "0.4@0.2", "--zeta", "0.4@0.2",
        "--sweep", "0.5,1,2,4",
    ]);
    assert_eq!(code(&o), 0);
    let t = String::from_utf8(o.stdout).unwrap();
    for v in column(&t, "overlap_sq") {
        assert!((v.parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("brif.csv");
    let o = hydrocs(&["diagnose", "--family", "brif", "--sweep", "1,2,3,4,5,6", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let t = std::fs::read_to_string(&out).unwrap();
    for v in column(&t, "max_eigen_deviation") {
        assert!(v.parse::<f64>().unwrap() < 1e-10);
    }
    let o = hydrocs(&["diagnose", "--family", "brif", "--sweep", "2", "--beta", "1,1@1.5707963267948966,0"]);
    let t = String::from_utf8(o.stdout).unwrap();
    assert_eq!(column(&t, "degenerate"), vec!["true"]);
}

#[test]
fn saddle_demo_tables() {
    let o = hydrocs(&["saddle-demo", "--benchmark", "stirling", "--lambda", "20,40,80,160"]);
    assert_eq!(code(&o), 0);
    let t = String::from_utf8(o.stdout).unwrap();
    let scaled: Vec<f64> = column(&t, "rel_error_x_lambda").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(scaled.len(), 4);
    assert!(scaled.iter().all(|v| (v - 1.0 / 12.0).abs() < 1e-3));

    let o = hydrocs(&["saddle-demo", "--benchmark", "circular", "--lambda", "100"]);
    let t = String::from_utf8(o.stdout).unwrap();
    let s: f64 = column(&t, "sigma_rho")[0].parse().unwrap();
    assert!((s - 10.0).abs() < 1e-6);
}
