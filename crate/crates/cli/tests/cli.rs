use std::process::{Command, Output};

use serde_json::Value;

fn aoi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = aoi(args);
    assert!(
        out.status.success(),
        "aoi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut args = args.to_vec();
    args.push("--json");
    serde_json::from_str(&stdout(&args)).expect("valid JSON")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn key_value(text: &str, key: &str) -> f64 {
    let (_, rows) = csv_rows(text);
    rows.iter()
        .find(|r| r[0] == key)
        .unwrap_or_else(|| panic!("no key {key}"))[1]
        .parse()
        .unwrap()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("aoi-cli-{}-{name}", std::process::id()))
}

#[test]
fn analyze_symmetric_pair() {
    let out = stdout(&[
        "analyze", "--mus", "20,20", "--alphas", "0.5,0.5", "--lambda", "20",
    ]);
    assert_eq!(key_value(&out, "approx_mean_aoi"), 0.109375);
    assert!((key_value(&out, "exact_mean_aoi") - 0.111458).abs() < 1e-6);
}

#[test]
fn analyze_single_server_json() {
    let v = json(&["analyze", "--mus", "20", "--lambda", "10"]);
    assert!((v["exact_mean_aoi"].as_f64().unwrap() - 0.175).abs() < 1e-12);
    assert!((v["approx_mean_aoi"].as_f64().unwrap() - 0.175).abs() < 1e-12);
    assert_eq!(v["servers"].as_array().unwrap().len(), 1);
}

#[test]
fn unstable_input_exits_2() {
    let out = aoi(&["analyze", "--mus", "20", "--lambda", "25"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unstable server"));
}

#[test]
fn invalid_inputs_exit_2() {
    for args in [
        &["analyze", "--mus", "20,x", "--lambda", "1"][..],
        &["analyze", "--lambda", "1"],
        &[
            "analyze", "--mus", "20,20", "--alphas", "0.7,0.7", "--lambda", "1",
        ],
        &["fig3", "--n-max", "11"],
        &["optimize", "--mus", "1", "--mode", "fastest"],
    ] {
        let out = aoi(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn optimize_modes() {
    let v = json(&["optimize", "--mus", "25,15", "--mode", "approx"]);
    let alphas: Vec<f64> = v["alphas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a.as_f64().unwrap())
        .collect();
    assert!((alphas[0] - 0.625).abs() < 1e-12 && (alphas[1] - 0.375).abs() < 1e-12);
    assert!((v["lambda"].as_f64().unwrap() - 21.2404).abs() < 1e-4);

    let v = json(&["optimize", "--mus", "1,1", "--mode", "exact"]);
    for rho in v["per_server_rho"].as_array().unwrap() {
        assert!((rho.as_f64().unwrap() - 0.5334).abs() < 1e-4);
    }
}

#[test]
fn table2_percent_error_round_trips() {
    let (header, rows) = csv_rows(&stdout(&["table2"]));
    assert_eq!(
        header,
        [
            "lambda1",
            "lambda2",
            "actual",
            "approximate",
            "percent_error"
        ]
    );
    assert_eq!(rows.len(), 10);
    for row in rows {
        let actual: f64 = row[2].parse().unwrap();
        let approx: f64 = row[3].parse().unwrap();
        let recomputed = 100.0 * (actual - approx).abs() / actual;
        assert_eq!(format!("{recomputed:.4}"), row[4]);
    }
}

#[test]
fn table2_json_round_trips() {
    let v = json(&["table2"]);
    for row in v.as_array().unwrap() {
        let r = row["reference"].as_f64().unwrap();
        let a = row["approximate"].as_f64().unwrap();
        assert_eq!(
            100.0 * (r - a).abs() / r,
            row["percent_error"].as_f64().unwrap()
        );
    }
}

#[test]
fn table1_is_deterministic_and_round_trips() {
    let args = ["table1", "--packets", "20000", "--seed", "5"];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    assert_ne!(
        first,
        stdout(&["table1", "--packets", "20000", "--seed", "6"])
    );

    let (header, rows) = csv_rows(&first);
    assert_eq!(
        header,
        ["lambda", "empirical", "approximate", "percent_error"]
    );
    let lambdas: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(lambdas, ["8", "10", "12", "16", "20", "24", "28", "32"]);
    for row in rows {
        let emp: f64 = row[1].parse().unwrap();
        let approx: f64 = row[2].parse().unwrap();
        assert_eq!(format!("{:.4}", 100.0 * (emp - approx).abs() / emp), row[3]);
    }
}

#[test]
fn simulate_same_seed_same_output() {
    let args = [
        "simulate",
        "--mus",
        "20,20",
        "--lambda",
        "20",
        "--packets",
        "50000",
        "--seed",
        "3",
    ];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    let mean = key_value(&first, "mean_aoi");
    assert!((mean - 0.111458).abs() / 0.111458 < 0.03);
}

#[test]
fn simulate_unstable_is_flagged_not_rejected() {
    let v = json(&[
        "simulate",
        "--mus",
        "1",
        "--lambda",
        "1.5",
        "--horizon",
        "200",
    ]);
    assert_eq!(v["unstable"], Value::Bool(true));
}

#[test]
fn simulate_writes_trace() {
    let path = temp_path("trace.csv");
    let p = path.to_str().unwrap();
    stdout(&[
        "simulate",
        "--mus",
        "5,3",
        "--lambda",
        "3",
        "--packets",
        "500",
        "--trace",
        p,
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let (header, rows) = csv_rows(&text);
    assert_eq!(header.len(), 4);
    assert!(rows.len() >= 500);
    for row in rows {
        let arrival: f64 = row[0].parse().unwrap();
        let departure: f64 = row[2].parse().unwrap();
        assert!(departure >= arrival);
    }
}

#[test]
fn fig3_matches_library() {
    let (_, rows) = csv_rows(&stdout(&["fig3", "--n-max", "3"]));
    assert_eq!(rows.len(), 3);
    let aoi: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((aoi[0] - 3.48444).abs() < 1e-5);
    assert!(aoi[0] > aoi[1] && aoi[1] > aoi[2]);
}

#[test]
fn dist_compare_densities() {
    let v = json(&[
        "dist-compare",
        "--lambda",
        "10",
        "--mu",
        "20",
        "--samples",
        "20000",
    ]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 10001);
    let col = |name: &str| -> Vec<(f64, f64)> {
        rows.iter()
            .map(|r| (r["x"].as_f64().unwrap(), r[name].as_f64().unwrap()))
            .collect()
    };
    let trapezoid = |pts: &[(f64, f64)], g: &dyn Fn(f64, f64) -> f64| -> f64 {
        pts.windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (g(w[0].0, w[0].1) + g(w[1].0, w[1].1)))
            .sum()
    };
    let gamma_mass = trapezoid(&col("gamma_pdf"), &|_, y| y);
    assert!((gamma_mass - 1.0).abs() < 1e-6, "gamma mass {gamma_mass}");
    let exact_mean = trapezoid(&col("exact_pdf"), &|x, y| x * y);
    assert!(
        (exact_mean - 0.175).abs() / 0.175 < 0.005,
        "exact mean {exact_mean}"
    );
}

#[test]
fn config_file_and_flag_precedence() {
    let path = temp_path("run.conf");
    std::fs::write(&path, "# defaults\nmus = 20,20\nlambda = 20\nn_max = 2\n").unwrap();
    let p = path.to_str().unwrap();
    let from_file = stdout(&["analyze", "--config", p]);
    let overridden = stdout(&["analyze", "--config", p, "--lambda", "10"]);
    let fig3 = stdout(&["fig3", "--config", p]);
    std::fs::remove_file(&path).ok();

    assert!((key_value(&from_file, "exact_mean_aoi") - 0.111458).abs() < 1e-6);
    assert_eq!(key_value(&overridden, "lambda"), 10.0);
    assert_eq!(csv_rows(&fig3).1.len(), 2);
}

#[test]
fn out_flag_writes_file() {
    let path = temp_path("table2.csv");
    let p = path.to_str().unwrap();
    let printed = stdout(&["table2", "--out", p]);
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(printed.is_empty());
    assert_eq!(written, stdout(&["table2"]));
}
