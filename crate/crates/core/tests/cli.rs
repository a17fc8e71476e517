use std::process::{Command, Output};

use serde_json::Value;

fn ewcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ewcheck")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_single_family_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = ewcheck(&["verify", "--suite", "S", "--stat", "bosonic", "--samples", "20", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["seed"], 42);
    assert_eq!(report["samples"], 20);
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert!(checks.iter().any(|c| c["name"] == "F + S4 = 0"));
    assert_eq!(report["conventions"]["metric_signature"], "(+,-,-,-)");
}

#[test]
fn wrong_statistics_fails_with_exit_1() {
    let o = ewcheck(&["verify", "--suite", "S", "--stat", "bosonic", "--samples", "10", "--assert-stat", "fermionic"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unsupported_statistics_is_a_usage_error() {
    let o = ewcheck(&["verify", "--suite", "I", "--stat", "fermionic", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn relations_recover_quartic_identity() {
    let o = ewcheck(&["relations", "--family", "I", "--stat", "bosonic", "--samples", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rel = &v["relations"][0];
    assert_eq!(rel["nullspace_dim"], 1);
    let basis = rel["basis"][0].as_array().unwrap();
    let ints: Vec<i64> = basis.iter().map(|x| x.as_i64().unwrap()).collect();
    assert!(ints == [2, -2, 1, -1] || ints == [-2, 2, -1, 1], "{ints:?}");
}

#[test]
fn eval_with_bind_file_and_expression_file() {
    let dir = tempfile::tempdir().unwrap();
    let bind = dir.path().join("bind.json");
    std::fs::write(
        &bind,
        r#"{"free": ["a"], "symbols": {
            "X": {"slots": ["isospin^"], "values": [[1, 0], [2, 0]]},
            "Y": {"slots": ["isospin_"], "values": [[3, 0], [0, 1]]}}}"#,
    )
    .unwrap();
    let expr = dir.path().join("expr.txt");
    std::fs::write(&expr, "# contraction\nX^{a} Y_{b} X^{b}\n\n2 X^{a} - X^{a}\n").unwrap();
    let o = ewcheck(&["eval", "--expr", expr.to_str().unwrap(), "--bind", bind.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["line"], 2);
    assert_eq!(results[1]["line"], 4);
    let first = &results[0]["value"][1]["value"][0];
    assert_eq!((first["re"].as_f64(), first["im"].as_f64()), (Some(6.0), Some(4.0)));
    let second = &results[1]["value"][1]["value"][0];
    assert_eq!(second["re"].as_f64(), Some(2.0));
}

#[test]
fn eval_reports_index_errors() {
    let o = ewcheck(&["eval", "--expr", "W_l^{a b} W_l^{a b}"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("byte 12"));
}

#[test]
fn enumerate_four_spinor_pairs() {
    let o = ewcheck(&["enumerate", "--slots", "spinor_{A B C D} dotted_{A' B' C' D'}"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 9);
    assert!(String::from_utf8_lossy(&o.stderr).contains("9 schemes"));
}

#[test]
fn vertices_written_as_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("v.csv");
    let o = ewcheck(&["vertices", "--term", "higgs-potential", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("legs,coefficient_numerator,coefficient_denominator,trig_powers,index_structure"));
    assert!(text.lines().count() > 1);
    let json = dir.path().join("v.json");
    let o = ewcheck(&["vertices", "--term", "yukawa", "--out", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let _: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ewcheck(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(ewcheck(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ewcheck(&["verify", "--samples", "0"]).status.code(), Some(2));
}
