use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tailchain"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn tailchain")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("tailchain-cli-{}-{name}", std::process::id()))
}

#[test]
fn alpha_three_decimals() {
    let o = run(&["alpha", "--alpha1", "0.99", "--beta1", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1.014");
    let o = run(&["alpha", "--alpha1", "0.04", "--beta1", "0.95"]);
    assert!(o.status.success());
    let a: f64 = stdout(&o).trim().parse().unwrap();
    assert!(a > 3.0, "{a}");
}

#[test]
fn alpha_json() {
    let o = run(&["alpha", "--alpha1", "0.15", "--beta1", "0.84", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let a = v["alpha"].as_f64().unwrap();
    assert!((v["two_alpha"].as_f64().unwrap() - 2.0 * a).abs() < 1e-12);
}

#[test]
fn nonstationary_is_parameter_error() {
    let o = run(&["alpha", "--alpha1", "10", "--beta1", "0.99"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["alpha", "--alpha1", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["oracle", "--alpha1", "0.1", "--beta1", "0.8", "--len", "-3"]).status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_and_conditioned() {
    let args = ["simulate", "--alpha1", "0.11", "--beta1", "0.88", "-m", "5", "-n", "7", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,sigma,zeta"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 13);
    assert_eq!(rows[0][0], -5.0);
    let zero = rows.iter().find(|r| r[0] == 0.0).unwrap();
    assert!(zero[2] > 1.0);
    for r in &rows {
        assert!(r[1] > 0.0);
    }
    let other = run(&["simulate", "--alpha1", "0.11", "--beta1", "0.88", "-m", "5", "-n", "7", "--seed", "10"]);
    assert_ne!(other.stdout, a.stdout);
}

#[test]
fn simulate_writes_output_file() {
    let path = tmp("sim.csv");
    let o = run(&["simulate", "--alpha1", "0.15", "--beta1", "0.84", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 22);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn unwritable_output_is_io_error() {
    let o = run(&["alpha", "--alpha1", "0.15", "--beta1", "0.84", "--output", "/nonexistent-dir/x.txt"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn counterexample_csv() {
    let o = run(&["counterexample", "--c", "3", "--levels", "6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("c,b,probability"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[1], f[2])
        })
        .collect();
    assert!(!rows.is_empty());
    for w in rows.windows(2) {
        assert!(w[1].1 <= w[0].1 + 1e-12);
    }
    let at = |b: f64| rows.iter().find(|r| (r.0 - b).abs() < 1e-9).unwrap().1;
    assert!((at(2.0) - 0.5).abs() < 1e-6);
    assert!(run(&["counterexample", "--c", "2"]).status.code() == Some(2));
}

#[test]
fn blocks_on_constant_series_is_parameter_error() {
    let path = tmp("const.csv");
    let body: String = std::iter::once("ret\n".to_string()).chain((0..2000).map(|_| "0.5\n".to_string())).collect();
    std::fs::write(&path, body).unwrap();
    let o = run(&["blocks", "--input", path.to_str().unwrap(), "--block-len", "50", "--quantile", "0.95"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn blocks_report_json() {
    let path = tmp("ret.csv");
    // Deterministic heavy-ish tailed sequence without clustering.
    let mut x: u64 = 12345;
    let mut body = String::from("r\n");
    for _ in 0..5000 {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let u = ((x >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        body.push_str(&format!("{}\n", u.powf(-0.5)));
    }
    body.push_str("not-a-number\n");
    std::fs::write(&path, body).unwrap();
    let o = run(&["blocks", "--input", path.to_str().unwrap(), "--block-len", "50", "--quantile", "0.95"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["skipped_rows"].as_u64(), Some(1));
    let est = v["estimate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&est));
    assert!(est > 0.7, "{est}");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn config_file_fills_missing_flags() {
    let path = tmp("cfg.txt");
    std::fs::write(&path, "alpha1 = 0.99\nbeta1 = 0\n").unwrap();
    let o = run(&["alpha", "--config", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), "1.014");
    let o = run(&["alpha", "--config", path.to_str().unwrap(), "--alpha1", "0.15", "--beta1", "0.84"]);
    assert_eq!(stdout(&o).trim(), "1.478");
    std::fs::remove_file(path).unwrap();
    assert_eq!(run(&["alpha", "--config", "/nonexistent.cfg"]).status.code(), Some(3));
}

#[test]
fn table1_single_row() {
    let o = run(&["table1", "--N", "500", "-m", "50", "--rows", "0.99,0", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v[0];
    assert!((row["alpha"].as_f64().unwrap() - 1.014).abs() < 1e-3);
    let theta = row["theta"]["estimate"].as_f64().unwrap();
    assert!(theta > 0.4 && theta < 0.75, "{theta}");
}

#[test]
fn estimate_negative_lag() {
    let o = run(&["estimate", "chi", "--alpha1", "0.99", "--beta1", "0", "--N", "2000", "--h", "-1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let chi = v["estimate"].as_f64().unwrap();
    assert!((chi - 0.256).abs() < 0.05, "{chi}");
}

#[test]
fn oracle_summary_keys() {
    let o = run(&["oracle", "--alpha1", "0.15", "--beta1", "0.84", "--len", "1e6", "--q", "0.995", "--m", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for k in ["params", "x", "n_exceed", "theta_hat", "chi", "gamma", "C_hat"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert_eq!(v["chi"].as_array().unwrap().len(), 3);
}
