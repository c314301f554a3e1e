use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn mslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mslab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Runs with `--json` into a temporary file and returns the exit code and report.
fn json_run(args: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--json", p]);
    let o = mslab(&all);
    let text = std::fs::read_to_string(&path).expect("report written");
    (o.status.code().unwrap(), serde_json::from_str(&text).unwrap())
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    &report["checks"][name]
}

#[test]
fn observer_spin_one_prints_the_split_row() {
    let o = mslab(&["observer", "--spin", "one"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("r_z(x_zero) = z_minus∨z_plus"));
}

#[test]
fn corrupted_quantale_exits_one_with_the_absorption_witness() {
    let path = data("corrupted.json");
    let (code, report) = json_run(&["check-axioms", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    let absorption = check(&report, "axioms.absorption");
    assert_eq!(absorption["passed"], false);
    assert_eq!(absorption["witness"], serde_json::json!([2]));
    let o = mslab(&["check-axioms", path.to_str().unwrap()]);
    assert!(stdout(&o).contains("FAIL axioms.absorption witness=[2]"));
}

#[test]
fn valid_frame_passes() {
    let (code, report) = json_run(&["check-axioms", data("chain3.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["passed"], true);
    assert_eq!(check(&report, "continuity.product_continuous")["passed"], true);
}

#[test]
fn beta_half_matches_the_worked_example() {
    let (code, report) = json_run(&["beta", "--spin", "half"]);
    assert_eq!(code, 0);
    assert_eq!(report["facts"]["beta"]["|down>"], "{|down>,|up>}");
    assert_eq!(report["facts"]["beta"]["|up>"], "{|down>,|up>}");
    assert_eq!(check(&report, "beta.preimage_of_diamond")["passed"], true);
}

#[test]
fn human_and_json_verdicts_agree() {
    let args = ["topology", "--check", "distributive"];
    let path = data("m3.json");
    let mut full: Vec<&str> = vec![args[0], path.to_str().unwrap()];
    full.extend(&args[1..]);
    let (code, report) = json_run(&full);
    assert_eq!(code, 1);
    let text = stdout(&mslab(&full));
    for (name, c) in report["checks"].as_object().unwrap() {
        let tag = if c["passed"] == true { "PASS" } else { "FAIL" };
        assert!(text.contains(&format!("{tag} {name}")), "{name} missing from {text}");
    }
}

#[test]
fn sobriety_of_the_z_space() {
    let o = mslab(&["topology", data("z_space.json").to_str().unwrap(), "--check", "sober"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("z_down <= z") && text.contains("z_up <= z"));
}

#[test]
fn sobriety_needs_a_space() {
    let o = mslab(&["topology", data("m3.json").to_str().unwrap(), "--check", "sober"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pair_groupoid_is_classical_and_not_local() {
    let (code, report) = json_run(&["groupoid", data("pair2.json").to_str().unwrap(), "--check"]);
    assert_eq!(code, 0);
    assert_eq!(report["facts"]["quantale_size"], 16);
    assert_eq!(report["facts"]["local"], false);
    assert!(report["facts"]["non_local_witness"]["witness"].is_array());
    assert_eq!(check(&report, "quantale.relation_isomorphism")["passed"], true);
}

#[test]
fn dot_goes_to_a_file_or_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m3.dot");
    let m3 = data("m3.json");
    let o = mslab(&["lattice", m3.to_str().unwrap(), "--dot", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(&path).unwrap();
    assert_eq!(dot.matches(" -> ").count(), 6);
    let o = mslab(&["lattice", m3.to_str().unwrap(), "--dot"]);
    assert!(stdout(&o).contains("digraph hasse"));
}

#[test]
fn report_dot_has_the_seven_node_fragment() {
    let o = mslab(&["report", "--dot"]);
    let text = stdout(&o);
    let dot = &text[text.find("digraph").expect("dot emitted")..];
    assert_eq!(dot.matches("[label=").count(), 7);
    assert_eq!(dot.matches(" -> ").count(), 8);
}

#[test]
fn report_is_red_only_on_the_closure() {
    let (code, report) = json_run(&["report"]);
    assert_eq!(code, 1);
    let failed: Vec<&String> =
        report["checks"].as_object().unwrap().iter().filter(|(_, c)| c["passed"] == false).map(|(k, _)| k).collect();
    assert_eq!(failed, ["c06.closure_terminates"]);
}

#[test]
fn huge_eps_collapses_ranks_into_failures() {
    let (code, report) = json_run(&["--eps", "0.5", "report"]);
    assert_eq!(code, 1);
    let failures = report["checks"].as_object().unwrap().values().filter(|c| c["passed"] == false).count();
    assert!(failures > 1, "only {failures} failures");
    assert_eq!(report["eps"], 0.5);
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(mslab(&["bogus"]).status.code(), Some(2));
    assert_eq!(mslab(&["observer", "--spin", "three"]).status.code(), Some(2));
    assert_eq!(mslab(&["--eps", "-1", "report"]).status.code(), Some(2));
    let o = mslab(&["check-axioms", data("malformed.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    assert_eq!(mslab(&["check-axioms", "no-such-file.json"]).status.code(), Some(2));
}
