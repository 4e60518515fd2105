use std::f64::consts::PI;
use std::process::{Command, Output};

use besselhr::{classical, C64};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besselhr")).args(args).output().expect("binary runs")
}

fn run_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besselhr"))
        .args(args)
        .env("BESSELHR_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV artifact, header comment and column line dropped.
fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    let text = stdout(o);
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# {"), "missing header line: {first}");
    let header: Value = serde_json::from_str(&first[2..]).unwrap();
    assert_eq!(header["tool"], "besselhr");
    assert_eq!(header["config_hash"].as_str().unwrap().len(), 64);
    let cols = lines.next().unwrap();
    assert!(cols.starts_with("x,") || cols.starts_with("m,"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn value(row: &[String]) -> C64 {
    C64::new(row[1].parse().unwrap(), row[2].parse().unwrap())
}

#[test]
fn rank_one_is_exponential() {
    let o = run(&["eval", "--n", "1", "--signs", "+", "--lambda", "0", "--x", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    assert!((value(&rows[0]) - C64::new(0.0, 1.0).exp()).norm() < 1e-12);
}

#[test]
fn rank_two_quarter_index() {
    // J(x; +, −, 1/4, −1/4) = (π/x)^{1/2} e^{−2x−πi/4}
    let o = run(&["eval", "--n", "2", "--signs", "+-", "--lambda", "0.25,-0.25", "--x", "1.0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let v = &doc["rows"][0]["value"];
    let got = C64::new(v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap());
    let want = PI.sqrt() * (-2.0f64).exp() * C64::new(0.0, -PI / 4.0).exp();
    assert!((got - want).norm() < 1e-12 * want.norm());
    assert_eq!(doc["header"]["command"], "eval");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["eval", "--n", "3", "--signs", "+-", "--lambda", "0.25,-0.25", "--x", "1"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--signs", "+x", "--x", "1"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--signs", "+-", "--x", "log:0:1:3"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--delta", "0,2"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_3_with_error_column() {
    // the expansion is not valid this close to the origin
    let o = run(&["eval", "--signs", "++-", "--method", "asympt", "--x", "0.5,30"]);
    assert_eq!(o.status.code(), Some(3));
    let rows = csv_rows(&o);
    assert!(rows[0][3].starts_with("error:"), "{:?}", rows[0]);
    assert_eq!(rows[0][4], "failed");
    assert_eq!(rows[1][4], "asympt");
}

#[test]
fn b_table_starts_at_one() {
    let o = run(&["coeffs", "--n", "3", "--terms", "10", "--xi", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let b = doc["b"].as_array().unwrap();
    assert_eq!(b.len(), 11);
    assert_eq!(b[0]["value"]["re"], 1.0);
    assert_eq!(b[0]["value"]["im"], 0.0);
}

#[test]
fn exact_tables_are_decimal_strings() {
    let o = run(&["coeffs", "--table", "a", "--terms", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // A_{20,20} does not fit in 64 bits
    let big = doc["a"][20][20].as_str().unwrap();
    assert!(big.len() > 20 && big.chars().all(|c| c.is_ascii_digit()));
}

#[test]
fn verification_suites_pass() {
    for args in [vec!["verify", "identity54", "--mmax", "8"], vec!["verify", "coeffs", "--n", "6"], vec!["verify", "rank2"]] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(doc["status"], "pass");
        assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
    }
}

#[test]
fn maass_kernel_table() {
    // J_F(−x) = 4cosh(πt) K_{2it}(4π√x) for λ = (it, −it), δ = 0
    let t = 0.7;
    let o = run(&["kernel", "--n", "2", "--lambda", "0.7i,-0.7i", "--side", "minus", "--x-grid", "log:0.1:10:5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        let x: f64 = r[0].parse().unwrap();
        assert!(x < 0.0);
        let want = 4.0 * (PI * t).cosh() * classical::bessel_k(C64::new(0.0, 2.0 * t), C64::new(4.0 * PI * (-x).sqrt(), 0.0)).unwrap();
        assert!((value(r) - want).norm() < 1e-9 * want.norm(), "x={x}");
        let cancellation: f64 = r[5].parse().unwrap();
        assert!(cancellation >= 1.0);
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["kernel", "--n", "3", "--lambda", "0.2,0.1i,-0.2-0.1i", "--delta", "1,0,0", "--side", "both", "--x-grid", "log:0.5:20:12"];
    let a = run_threads(&args, "1");
    let b = run_threads(&args, "3");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run_threads(&[&args[..], &["--tol", "1e-9"]].concat(), "1");
    let hash = |o: &Output| {
        let s = stdout(o);
        let h: Value = serde_json::from_str(&s.lines().next().unwrap()[2..]).unwrap();
        h["config_hash"].as_str().unwrap().to_string()
    };
    assert_ne!(hash(&a), hash(&c));
    assert_eq!(run_threads(&args, "zero").status.code(), Some(2));
}

#[test]
fn transform_table_and_functional_equation() {
    let o = run(&["transform", "--weight", "gaussian-log:η=0", "--n", "2", "--lambda", "0.1+0.2i,-0.1-0.2i", "--x-grid", "0.3,1,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&o).len(), 3);
    let o = run(&["transform", "--weight", "gaussian-log:eta=1", "--n", "2", "--lambda", "0.1+0.2i,-0.1-0.2i", "--delta", "0,1", "--fe"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["status"], "pass");
    assert_eq!(doc["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn oracle_compare_columns() {
    let o = run(&["oracle", "compare", "--signs", "++-", "--lambda", "0.2,0.1,-0.3", "--grid", "lin:20:40:3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let cols = text.lines().nth(1).unwrap();
    assert!(cols.contains("Re_series") && cols.contains("rel_mb_asympt"));
    for r in csv_rows(&o) {
        let d: f64 = r[r.len() - 2].parse().unwrap();
        assert!(d < 1e-7);
    }
}
