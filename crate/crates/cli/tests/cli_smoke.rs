use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fpplab");

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// The resolved config echoed on the first stdout line.
fn echoed(stdout: &str) -> Value {
    let line = stdout.lines().next().unwrap();
    serde_json::from_str(line.strip_prefix("config: ").unwrap()).unwrap()
}

#[test]
fn every_subcommand_runs_quickly_at_small_sizes() {
    let dir = TempDir::new().unwrap();
    let cases: &[&[&str]] = &[
        &["constants"],
        &["simulate", "--n", "200", "--trials", "5"],
        &["hops", "--n", "50", "--trials", "3"],
        &["verify-spt-tail", "--n", "1000", "--trials", "500"],
        &["verify-rrt-height", "--n", "300", "--trials", "500"],
        &["verify-max-tail", "--n", "60", "--trials", "5"],
        &["count-pairs", "--n", "5", "--k", "2"],
        &["light-paths", "--n", "12", "--k", "2", "--trials", "100"],
        &["lightest-given-light", "--n", "200", "--k", "2", "--trials", "50"],
        &["predicates", "--n", "40", "--k", "3", "--trials", "10"],
        &["key-lemma", "--n", "5", "--trials", "20"],
        &["coupling", "--n", "100", "--trials", "3"],
        &["order-stats", "--n", "20", "--trials", "50"],
        &["estimate-alpha", "--n-grid", "20,40,80", "--trials", "3"],
    ];
    for case in cases {
        let out = dir.path().join(format!("{}.out", case[0]));
        let mut args = case.to_vec();
        args.extend(["--workers", "2", "--out", out.to_str().unwrap()]);
        let start = Instant::now();
        let (code, stdout, stderr) = run(&args);
        assert!(start.elapsed() < Duration::from_secs(10), "{} too slow", case[0]);
        assert!(code == 0 || code == 1, "{}: exit {code}\n{stderr}", case[0]);
        assert_eq!(echoed(&stdout)["experiment"], case[0]);
        assert!(out.exists(), "{} wrote no output", case[0]);
    }
}

#[test]
fn two_vertices_have_single_hops() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("h.csv");
    let (code, stdout, _) = run(&["hops", "--n", "2", "--trials", "1", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("reference"));
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let headers = reader.headers().unwrap().clone();
    let row = reader.records().next().unwrap().unwrap();
    for col in ["hops_12", "max_hops_from_1", "max_hops_all_pairs"] {
        let idx = headers.iter().position(|h| h == col).unwrap();
        assert_eq!(&row[idx], "1");
    }
    assert!(headers.iter().all(|h| h != "runtime_ms"));
}

#[test]
fn config_files_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let (code, stdout, _) = run(&["order-stats", "--config", empty.to_str().unwrap(), "--trials", "20"]);
    assert_eq!(code, 0);
    let cfg = echoed(&stdout);
    assert_eq!(cfg["n"], 100);
    assert_eq!(cfg["trials"], 20);

    let file = dir.path().join("c.json");
    std::fs::write(&file, r#"{"n": 30, "trials": 40, "seed": "0x2a"}"#).unwrap();
    let (code, stdout, _) = run(&["order-stats", "--config", file.to_str().unwrap(), "--trials", "25"]);
    assert_eq!(code, 0);
    let cfg = echoed(&stdout);
    assert_eq!((cfg["n"].as_u64(), cfg["trials"].as_u64(), cfg["seed"].as_u64()), (Some(30), Some(25), Some(42)));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 1}"#).unwrap();
    assert_eq!(run(&["order-stats", "--config", bad.to_str().unwrap()]).0, 2);

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, "{\n  \"n\": 10,\n  \"colour\": 3\n}").unwrap();
    let (code, _, stderr) = run(&["order-stats", "--config", unknown.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 3"), "{stderr}");

    let other = dir.path().join("other.json");
    std::fs::write(&other, r#"{"experiment": "hops"}"#).unwrap();
    assert_eq!(run(&["order-stats", "--config", other.to_str().unwrap()]).0, 2);
}

#[test]
fn usage_and_guard_exit_codes() {
    assert_eq!(run(&["hops", "--bogus"]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
    assert_eq!(run(&["hops", "--n", "1"]).0, 2);
    assert_eq!(run(&["hops", "--seed", "0xZZ"]).0, 2);
    assert_eq!(run(&["order-stats", "--workers", "0"]).0, 2);
    let (code, _, stderr) = run(&["hops", "--n", "5000", "--trials", "2"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("estimated runtime"));
    assert_eq!(run(&["count-pairs", "--n", "30", "--k", "6"]).0, 3);
    assert_eq!(run(&["light-paths", "--n", "41"]).0, 3);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn failing_checks_exit_with_one() {
    // Pair counts at n = 4, k = 3 break the vanishing rule.
    assert_eq!(run(&["count-pairs", "--n", "4", "--k", "3"]).0, 1);
    assert_eq!(run(&["count-pairs", "--n", "4", "--k", "2"]).0, 0);
}

#[test]
fn constants_report_the_eps_family() {
    let (code, stdout, _) = run(&["constants", "--eps", "0.1"]);
    assert_eq!(code, 0);
    let json: Value = serde_json::from_str(stdout.split_once('\n').unwrap().1).unwrap();
    let alpha = json["theory"]["alpha_star"].as_f64().unwrap();
    assert!((alpha - 3.5911).abs() < 1e-4);
    assert!(json["epsilon_family"]["alpha_eps"].as_f64().unwrap() < alpha);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let (code, _, _) = run(&[
            "light-paths", "--n", "14", "--k", "2", "--trials", "200", "--seed", "99", "--workers", workers, "--out",
            path.to_str().unwrap(),
        ]);
        assert!(code <= 1);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(format!("{}.summary.json", a.display())).unwrap(),
        std::fs::read(format!("{}.summary.json", b.display())).unwrap()
    );
}
