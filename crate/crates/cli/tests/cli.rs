use std::path::Path;
use std::process::{Command, Output};

use evalcomb_cli::report::{Decimal, ReportRecord};
use evalcomb_cli::SimulationOutput;

fn evalcomb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evalcomb"))
        .args(args)
        .output()
        .expect("spawn evalcomb")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn number(d: &Decimal) -> f64 {
    match d {
        Decimal::Number(x) => *x,
        Decimal::Text(t) => panic!("expected a number, got {t}"),
    }
}

#[test]
fn combine_reports_both_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "e.txt", "e_value\n0\n8\n");
    let o = evalcomb(&["combine", "--input", &input, "--alpha", "0.5", "--stat", "max_average,optimized_betting"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let recs: Vec<ReportRecord> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 2);
    assert!((number(&recs[0].statistic) - 4.0).abs() < 1e-12);
    assert_eq!(recs[0].detail.argmax_k, Some(1));
    assert!((number(&recs[1].statistic) - 16.0 / 7.0).abs() < 1e-9);
    assert!((recs[1].detail.lambda_star.unwrap() - 3.0 / 7.0).abs() < 1e-9);
    assert!(recs.iter().all(|r| r.reject && r.detail.n == 2));
    // Unknown regime carries a warning.
    assert!(recs.iter().all(|r| !r.warnings.is_empty()));
}

#[test]
fn combine_input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.txt", "2\n-1\n");
    let o = evalcomb(&["combine", "--input", &input, "--alpha", "0.05"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let o = evalcomb(&["combine", "--input", "/no/such/file", "--alpha", "0.05"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "e.txt", "1\n2\n");
    for args in [
        vec!["combine", "--input", &input, "--alpha", "1.5"],
        vec!["combine", "--input", &input, "--alpha", "0.05", "--stat", "ville"],
        vec!["combine", "--input", &input, "--alpha", "0.05", "--regime", "weird"],
        vec!["combine", "--input", &input],
        vec!["simulate", "--scenario", "adversarial", "--alpha", "0.5", "--reps", "0"],
        vec!["simulate", "--scenario", "two_point:n=3", "--alpha", "0.5", "--reps", "10"],
        vec!["enumerate", "--scenario", "two_point:p=0.5,hi=2,n=30", "--threshold", "2", "--stat", "max_average"],
        vec!["frobnicate"],
    ] {
        let o = evalcomb(&args);
        assert_eq!(o.status.code(), Some(3), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn help_exits_zero() {
    let o = evalcomb(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("combine"));
}

#[test]
fn combine_tsv_and_ville() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "e.txt", "2\n2\n2\n");
    let o = evalcomb(&[
        "combine", "--input", &input, "--alpha", "0.125", "--stat", "ville", "--lambda", "1", "--format", "tsv",
        "--regime", "sequential",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 2);
    let cols: Vec<&str> = rows[1].split('\t').collect();
    assert_eq!(cols[0], "ville_sequential");
    assert_eq!(cols[4], "true");
}

#[test]
fn enumerate_prints_exact_rationals() {
    let o = evalcomb(&["enumerate", "--scenario", "adversarial", "--threshold", "2", "--stat", "max_average"]);
    assert_eq!(stdout(&o), "9/16 = 0.5625\n");
    let o = evalcomb(&["enumerate", "--scenario", "two_point:p=0.5,hi=2,lo=0,n=4", "--threshold", "10", "--stat", "max_average"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let (p, q) = out.split(" = ").next().unwrap().split_once('/').unwrap();
    let (p, q): (f64, f64) = (p.parse().unwrap(), q.parse().unwrap());
    assert!(p / q <= 0.1, "{out}");
    let o = evalcomb(&["enumerate", "--scenario", "two_point:p=1,hi=1,lo=0,n=3", "--threshold", "2", "--stat", "optimized_betting"]);
    assert_eq!(stdout(&o), "0/1 = 0\n");
}

#[test]
fn simulate_emits_summary_json() {
    let o = evalcomb(&["simulate", "--scenario", "adversarial", "--alpha", "0.5", "--reps", "20000", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out: SimulationOutput = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(out.summary.replications, 20_000);
    let rate = out.summary.rates.values().map(|r| r.rate).fold(0.0, f64::max);
    assert!((rate - 0.5625).abs() < 0.02, "{rate}");
    let again = evalcomb(&["simulate", "--scenario", "adversarial", "--alpha", "0.5", "--reps", "20000", "--seed", "4"]);
    assert_eq!(again.stdout, o.stdout);
    let reserialized = serde_json::to_string(&out).unwrap();
    assert_eq!(reserialized, stdout(&o).trim());
    assert!(stderr(&o).contains("replications in"));
}

#[test]
fn combine_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "e.txt", "0.3\n7\ninf\n1e300\n1e300\n");
    let o = evalcomb(&["combine", "--input", &input, "--alpha", "0.01", "--stat", "max_average,optimized_betting,ville", "--lambda", "0.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for line in stdout(&o).lines() {
        let rec: ReportRecord = serde_json::from_str(line).unwrap();
        assert_eq!(rec.to_json(), line);
    }
}
