use std::process::{Command, Output};

use knightian::welfare::{bound_curves, read_csv};
use knightian::Rational;
use serde_json::Value;

fn knightian(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knightian"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn alloc_prints_exact_probabilities() {
    let out = knightian(&["alloc", "--mech", "opt", "--delta", "1/3", "--bids", "10,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"probs":["5/8","0"]}"#);
    let out = knightian(&["alloc", "--mech", "2p", "--tie", "lex", "--bids", "5,5"]);
    assert_eq!(json(&out)["winner"], 1);
    let out = knightian(&["alloc", "--mech", "random", "--n", "4"]);
    assert_eq!(json(&out)["probs"], serde_json::json!(["1/4", "1/4", "1/4", "1/4"]));
    // decimals are exact
    let a = json(&knightian(&["alloc", "--mech", "opt", "--delta", "0.5", "--bids", "3,1"]));
    let b = json(&knightian(&["alloc", "--mech", "opt", "--delta", "1/2", "--bids", "3,1"]));
    assert_eq!(a, b);
}

#[test]
fn price_reports_log_terms() {
    let out = knightian(&["price", "--mech", "opt", "--delta", "1/3", "--bids", "10,2", "--player", "1", "--kind", "conditional"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["price"], serde_json::json!({"rat": "0", "logs": [["32/15", "2"]]}));
    let out = knightian(&["price", "--mech", "opt", "--delta", "1/3", "--bids", "10,2", "--player", "2", "--kind", "conditional"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let out = knightian(&["alloc", "--mech", "opt", "--delta", "1/0", "--bids", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero denominator"));
    assert_eq!(knightian(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(knightian(&["construct", "--theorem", "3", "--B", "9", "--delta", "1/2"]).status.code(), Some(3));
    assert_eq!(knightian(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_suites() {
    let out = knightian(&["verify", "theorem4", "--n", "2", "--B", "10", "--delta", "1/2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["pass"], true);

    let out = knightian(&["verify", "dm", "--mech", "opt", "--d", "1", "--n", "2", "--B", "8", "--delta", "1/3"]);
    assert_eq!(out.status.code(), Some(0));

    let out = knightian(&["verify", "dm", "--mech", "2p", "--tie", "lex", "--d", "1", "--n", "2", "--B", "8"]);
    assert_eq!(out.status.code(), Some(1));

    let out = knightian(&["verify", "good", "--mech", "random", "--n", "2", "--B", "5", "--delta", "1/2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["witness"]["bids"], serde_json::json!([5, 0]));

    let out = knightian(&["verify", "probe", "--mech", "2p", "--n", "2", "--B", "10", "--K", "3..5", "--K2", "4..6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["epsilon"], "0");
}

#[test]
fn dominance_commands() {
    let out = knightian(&["uded", "--mech", "2p", "--n", "2", "--B", "10", "--K", "3..5"]);
    let uded: Vec<i64> = serde_json::from_value(json(&out)["uded"].clone()).unwrap();
    assert!(uded.iter().all(|s| (2..=6).contains(s)));
    let out = knightian(&["dnt", "--mech", "2p", "--n", "2", "--B", "10", "--K", "3,7"]);
    assert_eq!(json(&out)["dnt"], serde_json::json!([]));
}

#[test]
fn construct_and_audit() {
    let v = json(&knightian(&["construct", "--theorem", "1", "--n", "2", "--B", "10", "--delta", "1/2"]));
    assert_eq!(v["c"], 3);
    assert_eq!(v["bound"], "4/5");
    let out = knightian(&["audit", "--direct", "uniform", "--n", "2", "--B", "10", "--delta", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["ratio"], "13/20");
    let out = knightian(&["audit", "--direct", "midpoint", "--n", "2", "--B", "6", "--delta", "1/2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["truthful"], false);
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curves.csv");
    let svg = dir.path().join("curves.svg");
    let out = knightian(&[
        "sweep",
        "--n",
        "2",
        "--grid",
        "0.05:0.95:0.05",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 19);
    let half = rows.iter().find(|r| r.delta == Rational::frac(1, 2)).unwrap();
    assert_eq!(half.curves.opt, Rational::frac(5, 9));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains(",0.555556,"));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));

    // the crossover row for four players
    let csv4 = dir.path().join("four.csv");
    knightian(&["sweep", "--n", "4", "--delta", "1/3", "--out", csv4.to_str().unwrap()]);
    let row = &read_csv(std::fs::File::open(&csv4).unwrap()).unwrap()[0];
    assert_eq!(row.curves.second_price, Rational::frac(1, 4));
    assert_eq!(row.curves, bound_curves(4, &Rational::frac(1, 3)).unwrap());

    // an empty grid writes nothing
    let none = dir.path().join("none.csv");
    let out = knightian(&["sweep", "--n", "2", "--grid", "0.9:0.1:0.1", "--out", none.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!none.exists());
}
