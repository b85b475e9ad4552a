use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn bafo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bafo"))
        .args(args)
        .env_remove("BAFO_WORK_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(name: &str) -> String {
    data(name).to_str().unwrap().to_owned()
}

#[test]
fn run_nyb_chopsticks() {
    let t = json(&bafo(&["run", "nyb", &path("chop.json"), "--order", "1,2,0"]));
    let bids: Vec<i64> = t["events"].as_array().unwrap().iter().map(|e| e["bid"].as_i64().unwrap()).collect();
    assert_eq!(bids, vec![40, 10, 50]);
    assert_eq!(t["outcome"]["winners"], serde_json::json!([1, 2]));
    assert_eq!(t["format"], "nyb");
    assert_eq!(t["instance_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn run_descending_gap4() {
    let low = json(&bafo(&["run", "descending", &path("gap4.json"), "--h", "2"]));
    assert_eq!(low["outcome"]["buyer_cost"], 2);
    let high = json(&bafo(&["run", "descending", &path("gap4.json"), "--h", "1"]));
    assert_eq!(high["outcome"]["buyer_cost"], 4);
    assert_eq!(high["outcome"]["final_prices"], serde_json::json!([1, 1, 1, 1]));
}

#[test]
fn solve_reports() {
    let r = json(&bafo(&["solve", "nyb", &path("chop-dime.json"), "--order", "1,2,0"]));
    assert_eq!(r["spe_winners"], serde_json::json!([1, 2]));
    assert_eq!(r["payments"], serde_json::json!([0, 4, 1]));
    assert!(r.get("runtime_ms").is_none());
    let r = json(&bafo(&["solve", "descending", &path("single.json"), "--h", "5"]));
    assert_eq!(r["spe_winners"], serde_json::json!([0]));
    assert_eq!(r["payments"], serde_json::json!([5]));
    let timed = json(&bafo(&["solve", "descending", &path("single.json"), "--timing"]));
    assert!(timed["runtime_ms"].is_u64());
}

#[test]
fn reports_are_reproducible() {
    let args = ["solve", "nyb", &path("chop-dime.json"), "--order", "2,0,1", "--seed", "9"];
    let (a, b) = (bafo(&args), bafo(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 9);
}

#[test]
fn budget_exit_code() {
    let out = bafo(&["solve", "nyb", &path("huge.json")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    let out = Command::new(env!("CARGO_BIN_EXE_bafo"))
        .args(["solve", "nyb", &path("chop-dime.json")])
        .env("BAFO_WORK_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn parse_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"version": 1, "n": 3, "costs": [1, 1, 1], "valuation": {"kind": "explicit", "values": [0, 1, 1, 1, 1, 1, 1]}}"#)
        .unwrap();
    assert_eq!(bafo(&["run", "nyb", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bafo(&["run", "nyb", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(bafo(&["run", "nyb", &path("chop.json"), "--order", "0,0,1"]).status.code(), Some(2));
    assert_eq!(bafo(&["bogus"]).status.code(), Some(2));
    let strat = dir.path().join("s.json");
    std::fs::write(&strat, "{").unwrap();
    assert_eq!(bafo(&["verify", "nyb", &path("chop.json"), "--strategies", strat.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_commands() {
    let out = bafo(&["verify", "nyb", &path("chop-dime.json"), "--order", "1,2,0"]);
    assert_eq!(json(&out)["verdict"]["result"], "pass");
    let out = bafo(&["verify", "nyb", &path("chop.json"), "--order", "1,2,0", "--strategies", &path("bid-95.json")]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["verdict"]["result"], "witness");
    assert_eq!(r["verdict"]["seller"], 0);
    let out = bafo(&["verify", "descending", &path("gap4.json"), "--h", "2", "--strategies", &path("always-freeze.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_reports() {
    let r = json(&bafo(&["check", &path("chop.json")]));
    assert_eq!(r["submodular"]["result"], "counterexample");
    assert_eq!(r["anonymous"]["result"], "counterexample");
    assert_eq!(r["gross_substitutes"]["result"], "counterexample");
    let r = json(&bafo(&["check", &path("gap4.json")]));
    assert_eq!(r["anonymous"]["result"], "pass");
    assert_eq!(r["concave"]["result"], "increases-at");
    let r = json(&bafo(&["check", &path("single.json")]));
    assert_eq!(r["submodular"]["result"], "pass");
    assert_eq!(r["gross_substitutes"]["result"], "pass");
}

#[test]
fn experiments() {
    let r = json(&bafo(&["experiment", "chopsticks", "--json"]));
    assert_eq!(r["pass"], true);
    let r = json(&bafo(&["experiment", "cost-gap", "--n", "6", "--json"]));
    assert_eq!(r["data"]["ratio"], "3");
    let text = bafo(&["experiment", "cost-gap", "--n", "4"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("doubled"));
    assert_eq!(bafo(&["experiment", "nope"]).status.code(), Some(2));
}

#[test]
fn gen_is_deterministic() {
    let a = bafo(&["gen", "--n", "3", "--seed", "1", "--max-value", "8"]);
    let b = bafo(&["gen", "--n", "3", "--seed", "1", "--max-value", "8"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["valuation"]["values"].as_array().unwrap().iter().all(|x| x.as_i64().unwrap() <= 8));
    assert_eq!(bafo(&["gen", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn data_files_are_canonical() {
    for name in ["chop.json", "chop-dime.json", "gap4.json", "single.json", "concave.json", "huge.json"] {
        let text = std::fs::read_to_string(data(name)).unwrap();
        let loaded = bafo::io::parse_instance(&text).unwrap();
        assert_eq!(bafo::io::serialize_instance(&loaded.instance, &loaded.tiebreak), text, "{name}");
    }
}
