use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mg"))
        .args(args)
        .env_remove("MG_THREADS")
        .output()
        .expect("spawn mg")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn simulate_to(path: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = mg(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    let args = ["--family", "perturbed-uniform", "--delta", "0.1", "--n", "500", "--seed", "42"];
    simulate_to(&p1, &args);
    simulate_to(&p2, &args);
    let a = fs::read(&p1).unwrap();
    assert_eq!(a, fs::read(&p2).unwrap());
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("value"));
    let rows: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(rows.len(), 500);
    assert!(rows.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn simulate_rejects_irregular_delta() {
    let out = mg(&["simulate", "--family", "perturbed-uniform", "--delta", "0.4", "--n", "10"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn simulate_accepts_json_spec() {
    let out = mg(&["simulate", "--spec", r#"{"family": "trunc_exp", "rate": 2.0}"#, "--n", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
    let bad = mg(&["simulate", "--spec", r#"{"family": "cauchy"}"#, "--n", "3"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn estimate_writes_density_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("v.csv");
    simulate_to(&data, &["--n", "2000", "--seed", "7"]);
    let out = mg(&["estimate", data.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("v,f_hat,lambda_hat,F_n"));
    let rows: Vec<Vec<f64>> =
        lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 257);
    for r in &rows {
        assert_eq!(r.len(), 4);
        let s = 1.0 - r[3];
        assert!((r[1] - r[2] * s * s).abs() <= 1e-15 * r[1].abs().max(1.0));
    }
    assert!(rows.windows(2).all(|w| w[1][2] >= w[0][2]));
    let mid = &rows[128];
    assert!((mid[1] - 1.0).abs() < 0.3, "{mid:?}");
}

#[test]
fn estimate_json_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("v.csv");
    simulate_to(&data, &["--n", "300", "--seed", "1"]);
    let out = mg(&["estimate", data.to_str().unwrap(), "--format", "json", "--grid-points", "9"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["grid"].as_array().unwrap().len(), 9);
    assert_eq!(v["n"], 300);
    assert!(v.get("F_n").is_some());

    let swapped = mg(&["estimate", data.to_str().unwrap(), "--a", "0.9", "--b", "0.1"]);
    assert_eq!(code(&swapped), 4);

    let tiny = dir.path().join("tiny.csv");
    fs::write(&tiny, "value\n0.3\n0.4\n").unwrap();
    assert_eq!(code(&mg(&["estimate", tiny.to_str().unwrap()])), 3);

    let same = dir.path().join("same.csv");
    fs::write(&same, "0.5\n0.5\n0.5\n0.5\n").unwrap();
    assert_eq!(code(&mg(&["estimate", same.to_str().unwrap()])), 3);

    let junk = dir.path().join("junk.csv");
    fs::write(&junk, "value\n0.1\nabc\n").unwrap();
    let out = mg(&["estimate", junk.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains('3'));

    let missing_dir = dir.path().join("nope").join("out.csv");
    let out = mg(&["estimate", data.to_str().unwrap(), "--out", missing_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn infer_reports_interval() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("v.csv");
    simulate_to(&data, &["--n", "5000", "--seed", "3"]);
    let out = mg(&["infer", data.to_str().unwrap(), "--v", "0.5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let lo = v["ci_lo"].as_f64().unwrap();
    let hi = v["ci_hi"].as_f64().unwrap();
    let f = v["f_hat"].as_f64().unwrap();
    assert!(lo < f && f < hi);
    assert_eq!(v["level"], 0.95);
    assert!((v["quantile"].as_f64().unwrap() - 0.52 * 1.959963984540054).abs() < 1e-9);
}

#[test]
fn infer_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("v.csv");
    simulate_to(&data, &["--n", "200", "--seed", "3"]);
    assert_eq!(code(&mg(&["infer", data.to_str().unwrap()])), 2);

    let table = dir.path().join("q.json");
    fs::write(&table, r#"[{"p": 0.9, "q": 0.5}, {"p": 0.95, "q": 0.4}, {"p": 0.99, "q": 0.9}]"#).unwrap();
    let out = mg(&["infer", data.to_str().unwrap(), "--v", "0.5", "--quantile-table", table.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    fs::write(&table, r#"[{"p": 0.9, "q": 0.66}, {"p": 0.99, "q": 1.21}]"#).unwrap();
    let out = mg(&["infer", data.to_str().unwrap(), "--v", "0.5", "--quantile-table", table.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = mg(&["infer", data.to_str().unwrap(), "--v", "0.5", "--level", "1.5"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn rate_reports_slope_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("rate.json");
    let csv = dir.path().join("rate.csv");
    let out = mg(&[
        "rate", "--n-grid", "200,800", "--reps", "20", "--seed", "5", "--threads", "2",
        "--out", json.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert!(v["slope"].as_f64().is_some());
    assert_eq!(v["per_n"].as_array().unwrap().len(), 2);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,"));
    assert_eq!(text.lines().count(), 3);

    let again = mg(&["rate", "--n-grid", "200,800", "--reps", "20", "--seed", "5", "--threads", "1"]);
    let w: Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(v, w);
}

#[test]
fn coverage_runs() {
    let out = mg(&["coverage", "--n-grid", "500", "--reps", "20", "--seed", "9"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let cov = v["per_n"][0]["coverage"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&cov));
}

#[test]
fn minimax_certificate() {
    let out = mg(&["minimax", "--n", "1000"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let h = v["hellinger_sq"].as_f64().unwrap();
    let bound = v["bound"].as_f64().unwrap();
    assert!(h > 0.0 && h <= bound);
    assert!((bound - 1.0 / 4000.0).abs() < 1e-15);
    assert_eq!(code(&mg(&["minimax", "--n", "1"])), 5);
}

#[test]
fn regularity_classification() {
    let out = mg(&["regularity", "--family", "gap-mixture"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["is_regular"], false);

    let out = mg(&["regularity", "--family", "perturbed-uniform", "--delta", "0.2"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["is_regular"], true);
}

#[test]
fn estimate_uniform_mid_range_mean() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("u.csv");
    simulate_to(&data, &["--n", "10000", "--seed", "11"]);
    let out = mg(&["estimate", data.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mid: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .filter(|r| (0.3..=0.7).contains(&r[0]))
        .map(|r| r[1])
        .collect();
    let mean = mid.iter().sum::<f64>() / mid.len() as f64;
    assert!((0.8..=1.2).contains(&mean), "{mean}");
}
