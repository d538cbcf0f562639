use std::process::{Command, Output};

use serde_json::Value;

fn hsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsp-elim")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_codes_through_the_process() {
    assert_eq!(hsp(&["subgroups", "Z4"]).status.code(), Some(0));
    assert_eq!(hsp(&["subgroups", "Z0"]).status.code(), Some(2));
    assert_eq!(hsp(&["game", "Z2", "--secret", "Z9"]).status.code(), Some(2));
    assert_eq!(hsp(&["state", "Z8", "--m", "5"]).status.code(), Some(3));
    assert_eq!(hsp(&["subgroups", "Z4", "--unknown"]).status.code(), Some(2));
    let bad = hsp(&["subgroups", "Z0"]);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
    assert!(bad.stdout.is_empty());
}

#[test]
fn failing_check_exits_one() {
    // tolerance far below double precision: the kernel comparison fails
    let out = hsp(&["verify", "Z4", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["result"]["passed"], false);
}

#[test]
fn header_mirrors_flags() {
    let v = json(&hsp(&["verify", "Z2xZ2", "--tol", "1e-8", "--cap", "100"]));
    assert_eq!(v["header"]["tolerances"]["subspace"], 1e-8);
    assert_eq!(v["header"]["cap"], 100);
    assert_eq!(v["header"]["group"], "Z2xZ2");
    assert_eq!(v["result"]["refinement"]["identical_up_to_relabeling"], true);
}

#[test]
fn out_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("hsp-elim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("game.json");
    let args = ["game", "Z2xZ2", "--trials", "50", "--seed", "7"];
    let direct = hsp(&args);
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let written = hsp(&with_out);
    assert_eq!(written.status.code(), Some(0));
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn game_examples() {
    let v = json(&hsp(&["game", "Z2xZ2", "--trials", "1000", "--seed", "7"]));
    assert!(v["result"]["stats"]["overall_accuracy"].as_f64().unwrap() >= 0.99);
    assert_eq!(v["header"]["seed"], 7);
    let t = json(&hsp(&["game", "Z2", "--secret", "full", "--trials", "1"]));
    let tr = &t["result"]["transcripts"][0];
    assert_eq!(tr["declared"], "full");
    assert_eq!(tr["statuses"][0]["round"], 20);
}

#[test]
fn dihedral_reports() {
    let v = json(&hsp(&["verify", "D5", "--dihedral"]));
    assert_eq!(v["result"]["pairwise"].as_array().unwrap().len(), 10);
    assert_eq!(v["result"]["multi_span_rank"], 1);
    // composite: dimensions only, no verdict
    let c = json(&hsp(&["dihedral", "D6"]));
    assert_eq!(c["result"]["impossibility"]["checks"], Value::Null);
    assert_eq!(c["result"]["impossibility"]["elimination_dims"], serde_json::json!([6, 6, 6, 6, 6, 6]));
}

#[test]
fn text_format_is_derived_from_json() {
    let t = hsp(&["subgroups", "Z4", "--format", "text"]);
    let s = String::from_utf8(t.stdout).unwrap();
    assert!(s.contains("count: 3"));
    assert!(s.contains("tool: hsp-elim"));
    assert!(s.contains("label: <2>"));
}
