use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypercross")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sets_example_has_fifteen_rows_in_band() {
    let o = run(&["sets", "--d", "2", "--r", "1", "--b", "0,0", "--n-min", "64", "--n-max", "1048576"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# hypercross "));
    assert!(text.contains("\n# config {"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "N,chi_count,theta_count,theta_prime_count,q_size,lemmaB_prediction,ratio");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 15);
    let ratios: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo <= 4.0);
    let q: u64 = rows[0][4].parse().unwrap();
    assert_eq!(q, 516);
}

#[test]
fn sets_json_round_trips() {
    let o = run(&["sets", "--n-min", "64", "--n-max", "1024", "--out", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["meta"]["command"], "sets");
    assert_eq!(v["rows"][0]["q_size"], 516);
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = run(&["sets", "--frobnicate", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_coordinate_frequency_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.poly");
    std::fs::write(&path, "d=2\n3 0 1 0\n2 3 0.5 0\n").unwrap();
    let o = run(&["norms", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[3, 0]"), "{}", stderr(&o));
}

#[test]
fn norms_reports_both_forms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.poly");
    std::fs::write(&path, "# sample\nd=1\n12 1 0\n-5 0 2\n").unwrap();
    let o = run(&["norms", "--input", path.to_str().unwrap(), "--p", "2", "--theta", "inf"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let blocks = v["blocks_norm"].as_f64().unwrap();
    let vp = v["vp_norm"].as_f64().unwrap();
    assert!((v["ratio"].as_f64().unwrap() - blocks / vp).abs() < 1e-12);
    assert_eq!(v["meta"]["config"]["theta"], "inf");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"d": 3, "r": 1.0, "n_min": 64, "n_max": 512}"#).unwrap();
    let o = run(&["sets", "--config", cfg.to_str().unwrap(), "--d", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains(r#""d":2"#));
    assert_eq!(data_rows(&text).len(), 4);
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"d": 2, "radius": 1.0}"#).unwrap();
    let o = run(&["sets", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radius"));
}

#[test]
fn dimension_cap_is_capacity_error() {
    let o = run(&["sets", "--d", "4"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn frequency_cap_is_capacity_error() {
    let o = run(&["witness", "--family", "g3", "--N", "1e9", "--r", "1"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn kernels_selfcheck_passes() {
    let o = run(&["kernels", "--selfcheck", "--max-n", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| !l.starts_with('#')).all(|l| l.starts_with("PASS")));
}

#[test]
fn kernels_emit_polynomial() {
    let o = run(&["kernels", "--fejer", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let f = hypercross::trigpoly::text::parse(&stdout(&o)).unwrap();
    assert_eq!(f.len(), 5);
}

#[test]
fn rates_csv_schema_and_fit() {
    let args = [
        "rates", "--family", "shell", "--d", "2", "--r", "1.5", "--b", "0,0", "--p", "2", "--q", "2", "--theta", "2",
        "--n-min", "256", "--n-max", "262144", "--samples", "1",
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "N,M,error,theory,ratio");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let error: f64 = r[2].parse().unwrap();
        let theory: f64 = r[3].parse().unwrap();
        let ratio: f64 = r[4].parse().unwrap();
        assert!((ratio - error / theory).abs() <= 1e-9 * ratio);
    }
    let fit = text.lines().find(|l| l.starts_with("# fit ")).unwrap();
    let rho: f64 = fit
        .split_whitespace()
        .find_map(|t| t.strip_prefix("rho_hat="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((rho - 1.5).abs() <= 0.15, "{fit}");
}

#[test]
fn rates_json_and_thread_independence() {
    let args = ["rates", "--family", "shell", "--r", "1.5", "--n-min", "256", "--n-max", "4096", "--samples", "3", "--out", "json"];
    let a = Command::new(env!("CARGO_BIN_EXE_hypercross"))
        .args(args)
        .env("HYPERCROSS_THREADS", "1")
        .output()
        .unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_hypercross"))
        .args(args)
        .env("HYPERCROSS_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 5);
    assert_eq!(v["regime"]["tag"], "T31");
}

#[test]
fn rates_regime_mismatch_is_usage_error() {
    let o = run(&["rates", "--family", "g7", "--r", "1.5", "--q", "2", "--n-min", "4096", "--n-max", "65536"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn witness_writes_polynomial_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    for family in ["g3", "g5", "g7"] {
        let path = dir.path().join(format!("{family}.poly"));
        let o = run(&[
            "witness", "--family", family, "--N", "65536", "--r", "1", "--p", "2", "--theta", "3", "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let poly = hypercross::trigpoly::text::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(format!("{}.json", path.display())).unwrap()).unwrap();
        let diag = &side["diagnostics"];
        assert_eq!(diag["family"], family);
        assert_eq!(diag["spectrum_size"].as_u64().unwrap() as usize, poly.len());
        assert!(diag["besov_norm"].as_f64().unwrap() > 0.0);
        assert!(diag["peak_value"].as_f64().unwrap() > 0.0);
        assert!(poly.zero_coordinate_frequency().is_none());
    }
    assert!(Path::new(&dir.path().join("g7.poly.json")).exists());
}

#[test]
fn verify_all_subset() {
    let o = run(&["verify-all", "--only", "2,3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[PASS] 2 "));
    assert!(text.contains("[PASS] 3 "));
    assert!(!text.contains("[PASS] 1 "));
    assert!(text.ends_with("summary: all criteria passed\n"));
}

#[test]
fn verify_all_rejects_unknown_criterion() {
    let o = run(&["verify-all", "--only", "42"]);
    assert_eq!(o.status.code(), Some(2));
}
