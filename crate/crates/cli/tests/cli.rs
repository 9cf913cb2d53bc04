use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn network(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../networks").join(name)
}

fn boolflow(args: &[&str]) -> (Option<i32>, Value, String) {
    let Output { status, stdout, stderr } = Command::new(env!("CARGO_BIN_EXE_boolflow")).args(args).output().expect("binary runs");
    let doc: Value =
        serde_json::from_slice(&stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&stdout)));
    (status.code(), doc, String::from_utf8_lossy(&stderr).into_owned())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_reports_stepping_and_slope() {
    let (code, doc, summary) = boolflow(&["analyze", "--network", path(&network("copy_negation.txt"))]);
    assert_eq!(code, Some(0));
    assert_eq!(doc["status"], "pass");
    assert_eq!(doc["result"]["one_stepping"], true);
    assert_eq!(doc["result"]["derrida_slope"]["exact"], "1");
    assert!(summary.contains("one-stepping: yes"), "{summary}");
    assert!(summary.contains("attractor periods [4]"), "{summary}");

    let (_, doc, summary) = boolflow(&["analyze", "--network", path(&network("mono_stepping.txt"))]);
    assert_eq!(doc["result"]["one_stepping"], false);
    assert_eq!(doc["result"]["monotone_stepping"], true);
    assert!(summary.contains("one-stepping: no; monotone-stepping: yes"), "{summary}");

    let (_, doc, _) = boolflow(&["analyze", "--network", path(&network("chaotic.txt"))]);
    assert_eq!(doc["result"]["derrida_slope"]["exact"], "3/2");
}

#[test]
fn identity_network_is_all_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("id.txt");
    std::fs::write(&file, "n=2\nf1 = s1\nf2 = s2\n").unwrap();
    let (code, doc, summary) = boolflow(&["analyze", "--network", path(&file)]);
    assert_eq!(code, Some(0));
    assert!(summary.contains("all states fixed"), "{summary}");
    assert_eq!(doc["result"]["fixed_points"].as_array().unwrap().len(), 4);
}

#[test]
fn convert_prints_polynomials_and_rejects_bad_forms() {
    let dir = tempfile::tempdir().unwrap();
    let and = dir.path().join("and.txt");
    std::fs::write(&and, "n=2\nf1 = s1 & s2\nf2 = s1 & s2\n").unwrap();
    let (code, doc, _) = boolflow(&["convert", "--network", path(&and), "--scheme", "W"]);
    assert_eq!(code, Some(0));
    assert_eq!(doc["result"]["coords"][0]["text"], "x1*x2");
    assert_eq!(doc["result"]["corner_check"]["passed"], true);

    let (_, doc, _) = boolflow(&["convert", "--network", path(&network("contradiction.txt")), "--scheme", "Rc"]);
    assert_eq!(doc["result"]["coords"][0]["text"], "x1^4 - x1^8");

    let (code, doc, _) = boolflow(&["convert", "--network", path(&network("copy_negation.txt")), "--scheme", "RF"]);
    assert_eq!(code, Some(2));
    assert_eq!(doc["status"], "error");
    assert!(doc["error"].as_str().unwrap().contains("RF"));
    assert_eq!(doc["run_config"]["scheme"], "RF");
}

#[test]
fn simulate_exit_code_follows_the_required_verdict() {
    let copy = network("copy_negation.txt");
    let (code, doc, _) = boolflow(&["simulate", "--network", path(&copy), "--x0", "-1.5,0.3", "--t-end", "40", "--require", "strong"]);
    assert_eq!(code, Some(0));
    assert_eq!(doc["result"]["verdict"]["level"], "StronglyConsistent");

    let product = network("product.txt");
    let args = ["simulate", "--network", path(&product), "--x0", "1.5,-0.3,-0.7,1.9", "--t-end", "40"];
    let (code, doc, _) = boolflow(&[&args[..], &["--require", "strong"]].concat());
    assert_eq!(code, Some(1));
    assert_eq!(doc["status"], "fail");
    assert_eq!(doc["result"]["verdict"]["level"], "Consistent");
    assert!(doc["reason"].as_str().unwrap().contains("below required"));
    let (code, _, _) = boolflow(&args);
    assert_eq!(code, Some(0));
}

#[test]
fn fixed_point_start_gives_a_constant_trace() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("one.txt");
    std::fs::write(&file, "n=1\nf1 = 1\n").unwrap();
    let (code, doc, _) = boolflow(&["simulate", "--network", path(&file), "--x0", "1.8", "--t-end", "20"]);
    assert_eq!(code, Some(0));
    assert_eq!(doc["result"]["verdict"]["trace"], serde_json::json!(["1"]));
}

#[test]
fn artifacts_embed_the_config_and_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let ring = network("ring3.txt");
        let args = ["simulate", "--network", path(&ring), "--x0", "-1.2,0.4,1.1", "--t-end", "30", "--seed", "7", "--out", path(&out)];
        let (code, _, _) = boolflow(&args);
        assert_eq!(code, Some(0));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let csv_a = std::fs::read_to_string(a.join("trajectory.csv")).unwrap();
    let csv_b = std::fs::read_to_string(b.join("trajectory.csv")).unwrap();
    let first = csv_a.lines().next().unwrap();
    assert!(first.starts_with("# run_config={"), "{first}");
    assert!(first.contains("\"seed\":7"));
    // the configs differ only in the output directory
    let body = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&csv_a), body(&csv_b));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(a.join("simulate.json")).unwrap()).unwrap();
    assert_eq!(report["run_config"]["seed"], 7);
    assert_eq!(report["run_config"]["command"], "simulate");
}

#[test]
fn sample_us_needs_d2_and_lands_in_the_region() {
    let ring = network("ring3.txt");
    let (code, doc, _) = boolflow(&["simulate", "--network", path(&ring), "--sample-us", "000"]);
    assert_eq!(code, Some(2));
    assert!(doc["error"].as_str().unwrap().contains("D2"));

    let (code, doc, _) = boolflow(&[
        "simulate",
        "--network",
        path(&ring),
        "--kind",
        "D2",
        "--gamma",
        "1,1,1,3e-5,3e-5,3e-5",
        "--sample-us",
        "000",
        "--t-end",
        "3e5",
        "--require",
        "strong",
    ]);
    assert_eq!(code, Some(0), "{doc}");
    assert_eq!(doc["result"]["verdict"]["trace"][0], "000");
}

#[test]
fn sweep_writes_csv_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let (code, doc, _) = boolflow(&["sweep", "--network", path(&network("copy_negation.txt")), "--samples", "2", "--out", path(&out)]);
    assert_eq!(code, Some(0), "{doc}");
    assert_eq!(doc["result"]["cells"][0]["frac_strong"], 1.0);
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# run_config="));
    assert_eq!(lines.next().unwrap(), "mu,state,sample_id,verdict,claim,switches");
    assert_eq!(lines.count(), 4 * 2);
}

#[test]
fn lyapunov_of_a_limit_cycle_is_near_zero() {
    let (code, doc, _) = boolflow(&["lyapunov", "--network", path(&network("copy_negation.txt")), "--x0", "1.5,-0.3", "--t-end", "500"]);
    assert_eq!(code, Some(0));
    assert!(doc["result"]["estimate"]["exponent"].as_f64().unwrap().abs() < 0.05, "{doc}");
}

#[test]
fn examples_pass() {
    let (code, doc, _) = boolflow(&["examples"]);
    assert_eq!(code, Some(0), "{doc}");
    assert_eq!(doc["result"]["passed"], true);
}

#[test]
fn missing_network_is_a_clean_error() {
    let (code, doc, _) = boolflow(&["analyze", "--network", "/nonexistent/net.txt"]);
    assert_eq!(code, Some(2));
    assert_eq!(doc["status"], "error");
}
