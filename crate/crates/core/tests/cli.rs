use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const K2: &str = "graph k2\nv a theta=1\nv b theta=1\ne a b w=1\n";
const K2_PROBLEM: &str = "graph k2.txt\nm=2\ntspan 0 0.5\ndelta all -1\nu0 all 1\npsi all 1\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graph-pme"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .expect("spawn CLI")
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("k2.txt"), K2).unwrap();
    fs::write(dir.path().join("problem.txt"), K2_PROBLEM).unwrap();
    dir
}

fn read_csv(dir: &Path, name: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(dir.join("out").join(name)).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

fn path_arg(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn kernel_on_k2_reports_closed_form_and_bounds() {
    let dir = workspace();
    let out = run(dir.path(), &["kernel", "--graph", &path_arg(dir.path(), "k2.txt"), "--t", "1", "--check-bounds", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(dir.path(), "kernel.csv");
    let ab = rows.iter().find(|r| &r[0] == "a" && &r[1] == "b").unwrap();
    let p: f64 = ab[2].parse().unwrap();
    let upper: f64 = ab[3].parse().unwrap();
    let lower: f64 = ab[4].parse().unwrap();
    assert!((p - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-10);
    assert!((upper - 2.0f64.exp() / 2.0).abs() < 1e-12);
    assert!((lower - (-2.0f64).exp()).abs() < 1e-12);
    assert_eq!(&ab[5], "pass");
}

#[test]
fn identity_sweep_writes_one_row_per_field() {
    let dir = workspace();
    let out = run(dir.path(), &["verify-identity", "--graph", "cycle_7", "--random-weights", "--random-fields", "30", "--m", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_csv(dir.path(), "identity.csv").len(), 30);
    let summary = fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    assert!(summary.trim_end().ends_with("result: ok"));
}

#[test]
fn harnack_single_query_on_k2() {
    let dir = workspace();
    let problem = path_arg(dir.path(), "problem.txt");
    let out = run(
        dir.path(),
        &["verify-harnack", "--problem", &problem, "--x", "a", "--y", "b", "--t1", "0", "--t2", "0.5", "--c0", "1"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let row = &read_csv(dir.path(), "harnack.csv")[0];
    let rhs: f64 = row.iter().nth(5).unwrap().parse().unwrap();
    assert!((rhs - 2.0 * 2.75f64.exp()).abs() < 1e-4, "{row:?}");
}

#[test]
fn stated_lemma_reports_failures_with_exit_one() {
    let dir = workspace();
    let out = run(dir.path(), &["--seed", "0", "verify-lemma", "--random", "200"]);
    assert_eq!(out.status.code(), Some(1));
    let rows = read_csv(dir.path(), "lemma.csv");
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().any(|r| r.iter().next_back() == Some("fail")));

    let out = run(dir.path(), &["--seed", "0", "verify-lemma", "--random", "200", "--anchor", "start"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_input_exits_two() {
    let dir = workspace();
    fs::write(dir.path().join("empty.txt"), "").unwrap();
    let out = run(dir.path(), &["kernel", "--graph", &path_arg(dir.path(), "empty.txt"), "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let out = run(dir.path(), &["kernel", "--graph", "nonsense_3", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(dir.path(), &["sweep", "--kind", "everything"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_seed_independent_and_repeatable() {
    let dir = workspace();
    let problem = path_arg(dir.path(), "problem.txt");
    let mut bytes = Vec::new();
    for seed in ["1", "2"] {
        let out = run(dir.path(), &["--seed", seed, "simulate", "--problem", &problem, "--outputs", "5"]);
        assert_eq!(out.status.code(), Some(0));
        bytes.push(fs::read(dir.path().join("out/trajectory.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let rows = read_csv(dir.path(), "trajectory.csv");
    // u = 1/(1 − t) at both vertices
    let last = rows.last().unwrap();
    let u: f64 = last[2].parse().unwrap();
    assert!((u - 2.0).abs() < 1e-6, "{last:?}");
}
