use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn redistrib(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redistrib"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("data.csv"), "id,income,need\na,5,1\nb,1,3\n").unwrap();
    std::fs::write(
        dir.path().join("data.json"),
        r#"{"agents":[{"id":"a","income":5,"need":1},{"id":"b","income":1,"need":3},{"id":"c","income":0,"need":0}]}"#,
    )
    .unwrap();
    dir
}

fn allocations(report: &Value) -> Vec<(String, f64)> {
    report["result"]["allocations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| (row["id"].as_str().unwrap().to_owned(), row["allocation"].as_f64().unwrap()))
        .collect()
}

#[test]
fn apply_prop_and_convex() {
    let dir = workspace();
    let out = redistrib(dir.path(), &["apply", "--rule", "prop", "--input", "data.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["schema_version"], "1");
    assert_eq!(allocations(&report), vec![("a".into(), 1.5), ("b".into(), 4.5)]);
    assert_eq!(report["result"]["summary"]["total"], 6.0);

    let out = redistrib(dir.path(), &["apply", "--rule", "convex(lf;prop;0.5)", "--input", "data.csv"]);
    assert_eq!(allocations(&json(&out)), vec![("a".into(), 3.25), ("b".into(), 2.75)]);
}

#[test]
fn apply_lf_returns_incomes_and_null_coverage() {
    let dir = workspace();
    let out = redistrib(dir.path(), &["apply", "--rule", "lf", "--input", "data.json"]);
    let report = json(&out);
    assert_eq!(
        allocations(&report),
        vec![("a".into(), 5.0), ("b".into(), 1.0), ("c".into(), 0.0)]
    );
    assert!(report["result"]["allocations"][2]["coverage"].is_null());
}

#[test]
fn apply_output_round_trips_bit_for_bit() {
    let dir = workspace();
    let rule = "ab:A=poly:0.1,0.3,B=affine:0.7,-0.2";
    let out = redistrib(
        dir.path(),
        &["apply", "--rule", rule, "--input", "data.json", "--output", "report.json"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();

    let p = redistrib_core::Problem::new(["a", "b", "c"], vec![5.0, 1.0, 0.0], vec![1.0, 3.0, 0.0]).unwrap();
    let expected = redistrib_core::evaluate(&rule.parse().unwrap(), &p).unwrap();
    let got: Vec<f64> = allocations(&written).into_iter().map(|(_, x)| x).collect();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&got), bits(expected.values()));
}

#[test]
fn check_exit_codes() {
    let dir = workspace();
    let run = |args: &[&str]| redistrib(dir.path(), args);
    let out = run(&["check", "--rule", "prop", "--axioms", "all", "--samples", "1000", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["passed"], true);

    let out = run(&["check", "--rule", "full", "--axioms", "dummy"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let cx = &report["result"]["axioms"][0]["counterexample"];
    assert_eq!(cx["witness"]["kind"], "dummy");
    assert!(cx["deviation"].as_f64().unwrap() > cx["threshold"].as_f64().unwrap());

    let out = run(&["check", "--rule", "afam:A=const:0.5", "--axioms", "stability"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["check", "--rule", "prop", "--axioms", "nat,fairness"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fairness"));
    assert!(out.stdout.is_empty());
}

#[test]
fn parse_and_dataset_errors() {
    let dir = workspace();
    let out = redistrib(dir.path(), &["apply", "--rule", "convex(lf;bogus;0.5)", "--input", "data.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    std::fs::write(dir.path().join("zero.csv"), "id,income,need\na,5,0\nb,1,0\n").unwrap();
    let out = redistrib(dir.path(), &["apply", "--rule", "prop", "--input", "zero.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ZeroTotalNeed"));

    let out = redistrib(dir.path(), &["apply", "--rule", "prop", "--input", "missing.csv"]);
    assert_eq!(out.status.code(), Some(3));

    let out = redistrib(dir.path(), &["extract", "--rule", "prop", "--grid", "2:1:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dual_of_full_is_need_adjusted_full() {
    let dir = workspace();
    let out = redistrib(dir.path(), &["dual", "--rule", "full", "--samples", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["result"]["dual"], "nafr");
    assert_eq!(report["result"]["classification"], "need-adjusted-full");
}

#[test]
fn extract_and_classify() {
    let dir = workspace();
    let out = redistrib(dir.path(), &["extract", "--rule", "prop", "--grid", "-2:2:1"]);
    let report = json(&out);
    let floats = |key: &str| -> Vec<f64> {
        report["result"][key].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect()
    };
    assert_eq!(floats("b"), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    assert!(floats("a").iter().all(|a| *a == 0.0));

    let out = redistrib(dir.path(), &["classify", "--rule", "lin:0.3,0.2", "--samples", "200"]);
    assert_eq!(json(&out)["result"]["classification"], "generic-AB");
}

#[test]
fn compare_has_one_column_per_rule() {
    let dir = workspace();
    let out = redistrib(dir.path(), &["compare", "--rules", "lf,prop,full", "--input", "data.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["rules"].as_array().unwrap().len(), 3);
    assert_eq!(report["result"]["allocations"][0]["allocations"], serde_json::json!([5.0, 1.5, 3.0]));
    assert_eq!(report["result"]["summary"].as_array().unwrap().len(), 3);
}

#[test]
fn reports_are_byte_identical_without_timestamp() {
    let dir = workspace();
    let args = ["check", "--rule", "lin:0.3,0.2", "--axioms", "all", "--samples", "300", "--no-timestamp"];
    let first = redistrib(dir.path(), &args);
    let second = redistrib(dir.path(), &args);
    assert_eq!(first.stdout, second.stdout);
    assert!(json(&first).get("timestamp").is_none());

    let stamped = redistrib(dir.path(), &["check", "--rule", "prop", "--axioms", "nat", "--samples", "10"]);
    assert!(json(&stamped)["timestamp"].is_string());
}
