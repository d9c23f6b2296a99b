use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaoa-limits"))
        .args(args)
        .env_remove("QAOA_LIMITS_THREADS")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn ok_text(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn reports_carry_schema_and_config() {
    let r = ok_json(&["predict", "--model", "sk", "--p", "1", "--restarts", "4", "--threads", "1"]);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["config"]["command"], "predict");
    assert_eq!(r["config"]["model"], "sk");
    assert_eq!(r["config"]["restarts"], 4);
    assert_eq!(r["config"]["threads"], 1);
}

#[test]
fn predict_er_depth_one_matches_stationarity_condition() {
    // Depth-one tree energy (d/2) sin 2β sin γ e^{-d(1 - cos γ)} is optimal at
    // β = -π/4 (after standardizing γ > 0) and d cos²γ + cos γ - d = 0.
    let d = 4.0f64;
    let r = ok_json(&["predict", "--model", "er", "--p", "1", "--d", "4", "--restarts", "20"]);
    let gamma = ((-1.0 + (1.0 + 4.0 * d * d).sqrt()) / (2.0 * d)).acos();
    let beta = -std::f64::consts::FRAC_PI_4;
    assert!((floats(&r["angles"]["gammas"])[0] - gamma).abs() < 1e-4);
    assert!((floats(&r["angles"]["betas"])[0] - beta).abs() < 1e-4);
    let energy = d / 2.0 * (2.0 * beta).sin() * gamma.sin() * (-d * (1.0 - gamma.cos())).exp();
    assert!((r["energy_per_vertex"].as_f64().unwrap() - energy).abs() < 1e-9);
    assert!((floats(&r["rescaled_gammas"])[0] - gamma * 2.0).abs() < 1e-4);
}

#[test]
fn predict_sk_depth_one_matches_dense_two_spin_optimum() {
    // (γ/2) sin 2β e^{-γ²/2} is extremal at γ = 1, sin 2β = -1.
    let r = ok_json(&["predict", "--model", "sk", "--p", "1", "--restarts", "20"]);
    assert!((floats(&r["angles"]["gammas"])[0] - 1.0).abs() < 1e-4);
    let expected = -0.5 * (-0.5f64).exp();
    assert!((r["energy_per_vertex"].as_f64().unwrap() - expected).abs() < 1e-9);
}

#[test]
fn predict_rejects_invalid_model_depth() {
    let out = run(&["predict", "--model", "diluted-p1", "--p", "2", "--d", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["predict", "--model", "er", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["predict", "--model", "sk", "--p", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn predict_writes_trace_csv_and_angle_file() {
    let dir = tempfile::tempdir().unwrap();
    let angles = dir.path().join("a.json");
    let csv = ok_text(&[
        "predict", "--model", "er", "--p", "2", "--d", "3", "--restarts", "3", "--format", "csv",
        "--angles-out", angles.to_str().unwrap(),
    ]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("restart,iterations,final_value"));
    assert_eq!(lines.count(), 3);
    let file: Value = serde_json::from_str(&fs::read_to_string(&angles).unwrap()).unwrap();
    assert_eq!(file["p"], 2);
    assert_eq!(file["betas"].as_array().unwrap().len(), 2);
}

#[test]
fn transfer_examples() {
    let dir = tempfile::tempdir().unwrap();
    let sk = write(dir.path(), "sk.json", r#"{"p": 2, "betas": [0.3, -0.2], "gammas": [0.8, 1.2]}"#);
    let same = ok_json(&["transfer", "--input", &sk, "--d", "1"]);
    assert_eq!(floats(&same["gammas"]), vec![0.8, 1.2]);
    let halved = ok_json(&["transfer", "--input", &sk, "--d", "4"]);
    assert_eq!(floats(&halved["gammas"]), vec![0.4, 0.6]);
    assert_eq!(floats(&halved["betas"]), vec![0.3, -0.2]);
    let er = write(dir.path(), "er.json", &halved.to_string());
    let back = ok_json(&["transfer", "--input", &er, "--d", "0.25"]);
    for (x, y) in floats(&back["gammas"]).iter().zip([0.8, 1.2]) {
        assert!((x - y).abs() < 1e-15);
    }
    let bad = write(dir.path(), "bad.json", r#"{"p": 2, "betas": [0.3], "gammas": [0.8, 1.2]}"#);
    assert_eq!(run(&["transfer", "--input", &bad, "--d", "4"]).status.code(), Some(2));
}

#[test]
fn mc_zero_gamma_is_exactly_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"p": 2, "betas": [0.3, -0.2], "gammas": [0.0, 0.0]}"#);
    let samples = dir.path().join("s.csv");
    let r = ok_json(&["mc", "--n", "16", "--angles", &a, "--samples", "20", "--samples-csv", samples.to_str().unwrap()]);
    assert_eq!(r["estimate"]["mean"].as_f64(), Some(0.0));
    assert_eq!(r["estimate"]["std_error"].as_f64(), Some(0.0));
    let text = fs::read_to_string(samples).unwrap();
    assert!(text.starts_with("sample_index,value\n0,0"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn mc_depth_four_needs_force_and_reports_huge_bound() {
    let dir = tempfile::tempdir().unwrap();
    // Depth-four SK optimum found with this crate's optimizer.
    let a = write(
        dir.path(),
        "a.json",
        r#"{"p": 4,
            "betas": [-1.1419892539267051, -0.8351305201238137, -0.6055575962484014, -0.34578873622248985],
            "gammas": [0.5898988709710777, 1.0287456323351734, 1.1171157275973869, 1.2857446211986794]}"#,
    );
    assert_eq!(run(&["mc", "--n", "32", "--angles", &a]).status.code(), Some(2));
    let r = ok_json(&["mc", "--n", "32", "--angles", &a, "--samples", "2", "--force"]);
    assert!(r["bound_log10_std_dev"].as_f64().unwrap() > 100.0);
    assert!(r["estimate"]["variance_bound"].is_null());
}

#[test]
fn simulate_is_reproducible_and_validates_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", r#"{"n": 3, "edges": [[0, 1], [1, 2], [0, 2]]}"#);
    let args = ["simulate", "--graph", &g, "--restarts", "3", "--shots", "50", "--seed", "4"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let r = ok_json(&args);
    let m = 3.0;
    let e = r["energy"].as_f64().unwrap();
    assert!((r["cut"]["expected_cut"].as_f64().unwrap() - (m - e) / 2.0).abs() < 1e-12);
    assert_eq!(r["restarts"].as_array().unwrap().len(), 3);

    let loop_graph = write(dir.path(), "l.json", r#"{"n": 2, "edges": [[0, 0]]}"#);
    let a = write(dir.path(), "a.json", r#"{"p": 1, "betas": [0.3], "gammas": [0.4]}"#);
    assert_eq!(run(&["simulate", "--graph", &loop_graph, "--angles", &a]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--sk-n", "40", "--angles", &a]).status.code(), Some(4));
}

#[test]
fn simulate_single_edge_by_hand() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", r#"{"n": 2, "edges": [[0, 1]]}"#);
    let a = write(dir.path(), "a.json", r#"{"p": 1, "betas": [0.3], "gammas": [0.9]}"#);
    let r = ok_json(&["simulate", "--graph", &g, "--angles", &a]);
    let expected = (0.6f64).sin() * (0.9f64).sin();
    assert!((r["energy"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn experiment_csv_is_reproducible() {
    let args = ["experiment", "--n", "8", "--p", "1", "--instances", "2", "--restarts", "4", "--format", "csv", "--seed", "2"];
    let a = ok_text(&args);
    assert_eq!(a, ok_text(&args));
    assert!(a.starts_with("instance,edges,guess_energy,warm_energy,best_random_energy,attempts_to_match"));
    assert_eq!(a.lines().count(), 3);
    assert_eq!(run(&["experiment", "--n", "24"]).status.code(), Some(4));
}

#[test]
fn landscape_grid_properties() {
    let csv = ok_text(&[
        "landscape", "--model", "er", "--d", "4", "--beta-steps", "41", "--gamma-steps", "81", "--format", "csv",
    ]);
    let rows: Vec<(f64, f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect();
    assert_eq!(rows.len(), 41 * 81);
    // Rows are ordered β-major, and the (β, γ) → (-β, -γ) image of row k is row N-1-k.
    for (k, &(b, g, e)) in rows.iter().enumerate() {
        if g == 0.0 {
            assert!(e.abs() < 1e-12);
        }
        let (mb, mg, me) = rows[rows.len() - 1 - k];
        assert!((mb + b).abs() < 1e-12 && (mg + g).abs() < 1e-12);
        assert!((me - e).abs() < 1e-12);
    }
    let best = rows.iter().cloned().fold((0.0, 0.0, f64::INFINITY), |a, r| if r.2 < a.2 { r } else { a });
    let p = ok_json(&["predict", "--model", "er", "--p", "1", "--d", "4", "--restarts", "10"]);
    let grid_spacing = 2.0 * std::f64::consts::PI / 80.0;
    assert!(best.2 >= p["energy_per_vertex"].as_f64().unwrap() - 1e-12);
    assert!((best.2 - p["energy_per_vertex"].as_f64().unwrap()).abs() < 2.0 * grid_spacing);
    assert_eq!(run(&["landscape", "--model", "er", "--d", "4", "--beta-steps", "2000", "--gamma-steps", "600"]).status.code(), Some(4));
}

#[test]
fn thread_settings() {
    let out = Command::new(env!("CARGO_BIN_EXE_qaoa-limits"))
        .args(["predict", "--model", "sk", "--p", "1", "--restarts", "2"])
        .env("QAOA_LIMITS_THREADS", "2")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["config"]["threads"], 2);
    assert_eq!(run(&["predict", "--model", "sk", "--threads", "0"]).status.code(), Some(2));
}
