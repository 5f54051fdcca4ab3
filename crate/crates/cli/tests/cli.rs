use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn maslov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maslov"))
        .args(args)
        .env_remove("MASLOV_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Plane loop `diag(e^{iπ kⱼ t})·ℝⁿ`, so `det²` winds `Σ kⱼ` times.
fn plane_loop(k: &[f64], intervals: usize) -> Value {
    let n = k.len();
    let times: Vec<f64> = (0..=intervals).map(|i| i as f64 / intervals as f64).collect();
    let frames: Vec<Vec<f64>> = times
        .iter()
        .map(|t| {
            let mut cols = vec![0.0; 2 * n * n];
            for (j, kj) in k.iter().enumerate() {
                let a = PI * kj * t;
                cols[j * 2 * n + j] = a.cos();
                cols[j * 2 * n + n + j] = a.sin();
            }
            cols
        })
        .collect();
    json!({ "n": n, "times": times, "frames": frames })
}

#[test]
fn index_of_a_winding_three_loop() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "w3.json", &plane_loop(&[3.0], 64).to_string());
    let r = stdout_json(&maslov(&["index", s(&f)]));
    assert_eq!(r["outputs"]["index"], 3);
    assert!(r["outputs"]["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["conventions"]["orientation"], "right_handed");
}

#[test]
fn index_of_an_orbit_loop_matches_the_fixed_point_formula() {
    // m = (2, −1) rotates each coordinate line by 2π mⱼ t
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "orbit.json", &plane_loop(&[4.0, -2.0], 128).to_string());
    let r = stdout_json(&maslov(&["index", s(&f)]));
    assert_eq!(r["outputs"]["index"], 2);
}

#[test]
fn section_phase_from_base_points() {
    let dir = TempDir::new().unwrap();
    let mut l = plane_loop(&[2.0], 128);
    let times: Vec<f64> = l["times"].as_array().unwrap().iter().map(|t| t.as_f64().unwrap()).collect();
    let base: Vec<Vec<f64>> = times.iter().map(|t| vec![0.5 * (2.0 * PI * t).cos(), 0.5 * (2.0 * PI * t).sin()]).collect();
    l["base"] = json!(base);
    let f = write(&dir, "orbit.json", &l.to_string());
    let conn = r#"{"bundle":"trivial","tau":{"kind":"poly","coeffs":[[0.7,2,1],[-0.3,0,3]]}}"#;
    let r = stdout_json(&maslov(&["index", s(&f), "--connection", conn]));
    assert_eq!(r["outputs"]["index"], 2);
}

#[test]
fn undersampled_loop_exits_with_ambiguity() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "coarse.json", &plane_loop(&[10.0], 16).to_string());
    let out = maslov(&["index", s(&f)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refine"));
    let fine = write(&dir, "fine.json", &plane_loop(&[1.0], 16).to_string());
    assert_eq!(maslov(&["index", s(&fine), "--samples", "32"]).status.code(), Some(3));
}

#[test]
fn schema_violations_exit_with_input_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"n":1,"times":[0,1],"framez":[]}"#);
    assert_eq!(maslov(&["index", s(&bad)]).status.code(), Some(2));
    let missing = dir.path().join("absent.json");
    assert_eq!(maslov(&["index", s(&missing)]).status.code(), Some(2));
    let mut open = plane_loop(&[1.0], 32);
    open["frames"][32] = json!([0.0, 1.0]);
    let f = write(&dir, "open.json", &open.to_string());
    assert_eq!(maslov(&["index", s(&f)]).status.code(), Some(2));
}

const LINEAR_11: &str = r#"{"kind":"linear","weights":[1,1]}"#;
const FLAT: &str = r#"{"bundle":"trivial","tau":{"kind":"zero"}}"#;

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn qbeta_origin_row_and_flat_grid() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "pts.csv", "a,b,c,d\n0,0,0,0\n0.1,0.2,0,0\n0.3,-0.1,0.2,0.5\n");
    let out = maslov(&["qbeta", "--action", LINEAR_11, "--connection", FLAT, "--points", s(&pts)]);
    assert!(out.status.success());
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0], ["x0", "x1", "x2", "x3", "q_value", "is_fixed", "nearest_even"]);
    assert_eq!(rows[1][4].parse::<f64>().unwrap(), 4.0);
    assert_eq!((rows[1][5].as_str(), rows[1][6].as_str()), ("true", "4"));
    for row in &rows[2..] {
        assert!((row[4].parse::<f64>().unwrap() - 4.0).abs() < 1e-10);
        assert_eq!(row[5], "false");
    }
    assert_eq!(rows[1][0], "0.0000000000000000e0");
}

#[test]
fn qbeta_writes_csv_and_report_and_parallel_matches_serial() {
    let dir = TempDir::new().unwrap();
    let pts: Vec<Vec<f64>> = (0..12).map(|k| vec![0.1 * k as f64, -0.05 * k as f64, 0.0, 0.02 * k as f64]).collect();
    let pts = write(&dir, "pts.json", &json!(pts).to_string());
    let conn = r#"{"bundle":"trivial","tau":{"kind":"liouville"}}"#;
    let serial = dir.path().join("serial.csv");
    let parallel = dir.path().join("parallel.csv");
    let r = stdout_json(&maslov(&["qbeta", "--action", LINEAR_11, "--connection", conn, "--points", s(&pts), "--out", s(&serial)]));
    assert_eq!(r["outputs"]["rows"], 12);
    assert_eq!(r["outputs"]["fixed_points"], 1);
    maslov(&["qbeta", "--action", LINEAR_11, "--connection", conn, "--points", s(&pts), "--out", s(&parallel), "--jobs", "4"]);
    assert_eq!(std::fs::read(&serial).unwrap(), std::fs::read(&parallel).unwrap());
}

#[test]
fn qbeta_empty_points_give_empty_csv() {
    let dir = TempDir::new().unwrap();
    let pts = write(&dir, "none.csv", "");
    let csv = dir.path().join("out.csv");
    let out = maslov(&["qbeta", "--action", LINEAR_11, "--connection", FLAT, "--points", s(&pts), "--out", s(&csv)]);
    assert!(out.status.success());
    assert!(std::fs::read(&csv).unwrap().is_empty());
}

#[test]
fn qbeta_torus_and_sphere() {
    let dir = TempDir::new().unwrap();
    let origin = write(&dir, "o.json", "[[0,0,0,0]]");
    let torus = r#"{"kind":"torus","components":[{"kind":"linear","weights":[2,-1]},{"kind":"linear","weights":[1,1]}]}"#;
    let out = maslov(&["qbeta", "--action", torus, "--connection", FLAT, "--points", s(&origin)]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0][4..], ["q_value_1", "q_value_2", "is_fixed", "nearest_even_1", "nearest_even_2"]);
    assert_eq!(rows[1][7..], ["2", "4"]);

    let poles = write(&dir, "poles.json", "[[0,0,1],[0,0,-1],[1,0,0]]");
    let rot = r#"{"kind":"sphere","axis":[0,0,2]}"#;
    let sphere = r#"{"bundle":"sphere","perturbation":{"kind":"poly","coeffs":[[0.4,1,1,0]]}}"#;
    let out = maslov(&["qbeta", "--action", rot, "--connection", sphere, "--points", s(&poles)]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0][3..], ["q_value", "is_fixed", "nearest_even"]);
    assert_eq!((rows[1][4].as_str(), rows[1][5].as_str()), ("true", "2"));
    assert_eq!((rows[2][4].as_str(), rows[2][5].as_str()), ("true", "-2"));
    assert_eq!(rows[3][4], "false");

    let gamma = r#"{"bundle":"sphere","level":"gamma"}"#;
    assert_eq!(maslov(&["qbeta", "--action", rot, "--connection", gamma, "--points", s(&poles)]).status.code(), Some(2));
    assert_eq!(maslov(&["qbeta", "--action", LINEAR_11, "--connection", gamma, "--points", s(&origin)]).status.code(), Some(2));
    let wrong_dim = write(&dir, "w.json", "[[0,0]]");
    assert_eq!(maslov(&["qbeta", "--action", LINEAR_11, "--connection", FLAT, "--points", s(&wrong_dim)]).status.code(), Some(2));
}

#[test]
fn sphere_demo_reports_pole_indices_and_constants() {
    let r = stdout_json(&maslov(&["sphere-demo"]));
    let o = &r["outputs"];
    assert_eq!((o["k_n"]["index"].as_i64(), o["k_s"]["index"].as_i64()), (Some(2), Some(-2)));
    assert!((o["characteristic_number"]["value"].as_f64().unwrap().abs() - 2.0).abs() < 1e-3);
    assert_eq!(o["characteristic_number"]["nearest"].as_i64().unwrap(), -o["clutching_degree"].as_i64().unwrap());
    assert_eq!(o["transitivity"]["rank_histogram"], json!({ "3": 100 }));
    assert!((o["hamiltonian_fit"]["c"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(o["winding_pair"], json!([1, 2]));

    let flipped = stdout_json(&maslov(&["sphere-demo", "--axis", "1,-1,0", "--flip-orientation"]));
    let o = &flipped["outputs"];
    assert_eq!(flipped["conventions"]["orientation"], "reversed");
    assert_eq!((o["k_n"]["index"].as_i64(), o["k_s"]["index"].as_i64()), (Some(-2), Some(2)));
    assert!((o["r"]["value"].as_f64().unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-8);

    assert_eq!(maslov(&["sphere-demo", "--axis", "0,0,0"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = Command::new(env!("CARGO_BIN_EXE_maslov"))
            .args(["verify", "--out", s(p)])
            .env("MASLOV_SEED", "12345")
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let r: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(r["seed"], 12345);
    assert_eq!(r["outputs"]["passed"], true);
}

#[test]
fn verify_catches_an_injected_defect() {
    let out = maslov(&["verify", "--mutate", "drop-square"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("actions.evenness"));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["outputs"]["passed"], false);
    assert_eq!(maslov(&["verify", "--mutate", "conjugate-det-squared"]).status.code(), Some(1));
}
