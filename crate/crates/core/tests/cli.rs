use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "examples", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn ultras(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultras")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_accepts_valid_and_rejects_overlap() {
    let ok = ultras(&["check", &data("buffer.spec")]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("ok"));
    let bad = ultras(&["check", &data("overlap.spec")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("overlapping"));
}

#[test]
fn bisim_across_files_with_oracle() {
    let o = ultras(&["--roots", "P,Q", "--oracle", "bisim", &data("pepa1.spec"), &data("pepa2.spec")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("bisimilar: yes"));
}

#[test]
fn tiny_budget_is_inconclusive() {
    let o = ultras(&["--budget", "1", "--roots", "P,Q", "bisim", &data("pepa1.spec"), &data("pepa2.spec")]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn pepa_race_and_compare() {
    let d = ultras(&["pepa", "derive", &data("race.pepa")]);
    assert_eq!(d.status.code(), Some(0));
    assert!(stdout(&d).contains("-[a]-> {nil: 5}"));
    let c = ultras(&["pepa", "compare", &data("race1.pepa"), &data("race2.pepa")]);
    assert_eq!(c.status.code(), Some(0));
    assert!(stdout(&c).contains("equivalent: yes"));
    let s = ultras(&["--oracle", "pepa", "derive", &data("server.pepa")]);
    assert_eq!(s.status.code(), Some(0), "{}", stdout(&s));
}

#[test]
fn emitted_spec_reparses() {
    let e = ultras(&["pepa", "emit-spec", &data("race.pepa")]);
    assert_eq!(e.status.code(), Some(0));
    let dir = std::env::temp_dir().join(format!("ultras-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("race.spec");
    std::fs::write(&file, &e.stdout).unwrap();
    let c = ultras(&["check", file.to_str().unwrap()]);
    assert_eq!(c.status.code(), Some(0), "{}", stdout(&c));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn translate_formats() {
    let w = ultras(&["--roots", "sw(pre(nil))", "--oracle", "translate", &data("stochastic.wgsos")]);
    assert_eq!(w.status.code(), Some(0));
    assert!(stdout(&w).contains("# oracle: agree"));
    let s = ultras(&["translate", &data("coins.sgsos")]);
    assert_eq!(s.status.code(), Some(0));
    assert!(stdout(&s).contains("leaf 1"));
}

#[test]
fn minimize_and_output_formats() {
    let m = ultras(&["--roots", "P", "minimize", &data("pepa1.spec")]);
    assert_eq!(m.status.code(), Some(0));
    assert!(stdout(&m).contains("class {"));
    let g = ultras(&["--roots", "P", "--format", "graph", "derive", &data("pepa1.spec")]);
    assert!(stdout(&g).starts_with("digraph"));
    let j = ultras(&["--roots", "P", "--format", "structured", "derive", &data("pepa1.spec")]);
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).expect("valid JSON");
    assert_eq!(v["monoid"], "rat-plus-inf");
}

#[test]
fn monoid_reports() {
    let o = ultras(&["monoid", &data("m4.table")]);
    assert_eq!(stdout(&o).trim(), "positive: yes, refinement: no, clubs: {}, {a,b,1}");
    let n = ultras(&["monoid", "nat-plus"]);
    assert!(stdout(&n).contains("clubs: {}, nonzero"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ultras(&["bogus"]).status.code(), Some(2));
    assert_eq!(ultras(&["check", "/nonexistent/file.spec"]).status.code(), Some(2));
}
