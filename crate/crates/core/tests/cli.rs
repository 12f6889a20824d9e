use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sunflower"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = run(&full);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (code, v)
}

#[test]
fn check_verdicts_and_parse_errors() {
    let tri = fixture("triangle.txt");
    let (code, v) = json(&["check", &tri, "--L", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["l_intersecting"], true);
    assert_eq!(v["outputs"]["intersection_profile"], serde_json::json!([1]));

    let (code, v) = json(&["check", &tri, "--d", "0"]);
    assert_eq!(code, 1);
    assert_eq!(v["outputs"]["d_intersecting"], false);

    let out = run(&["check", &fixture("malformed.txt")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3: duplicate element 1"));

    let out = run(&["check", "/nonexistent/family.txt"]);
    assert_eq!(out.status.code(), Some(4));

    let (code, v) = json(&["check", &fixture("star_weighted.json"), "--uniform", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["family"]["size"], 4);
}

#[test]
fn find_outcomes() {
    let (code, v) = json(&["find", &fixture("disjoint7.txt"), "--r", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["outcome"]["kind"], "found");
    assert_eq!(v["outputs"]["outcome"]["method"], "constructive");
    assert_eq!(
        v["outputs"]["outcome"]["sunflower"]["core"],
        serde_json::json!([])
    );
    assert_eq!(v["outputs"]["trace"]["outcome"]["kind"], "found");

    let (code, v) = json(&["find", &fixture("triangle.txt"), "--r", "3"]);
    assert_eq!(code, 1);
    assert_eq!(v["outputs"]["outcome"]["kind"], "absent");

    let (code, v) = json(&[
        "find",
        &fixture("random_30_3_60.txt"),
        "--r",
        "3",
        "--strategy",
        "brute-force",
        "--budget",
        "1",
    ]);
    assert_eq!(code, 2);
    assert_eq!(v["outputs"]["outcome"]["kind"], "unknown");

    let out = run(&["find", &fixture("triangle.txt"), "--r", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bounds_examples() {
    let (code, v) = json(&["bounds", "--which", "er", "-n", "3", "-r", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["value"]["value"], "48");
    let (_, v) = json(&[
        "bounds", "--which", "theorem1", "-n", "3", "-s", "1", "-r", "3",
    ]);
    assert_eq!(v["outputs"]["value"]["value"], "56");
    let (_, v) = json(&[
        "bounds", "--which", "claim1", "-n", "2", "--L", "0", "-r", "3",
    ]);
    assert_eq!(v["outputs"]["value"]["value"], "6");
    let (_, v) = json(&[
        "bounds",
        "--which",
        "crossover",
        "-n",
        "100",
        "-r",
        "3",
        "-C",
        "1",
    ]);
    assert_eq!(v["outputs"]["rows"].as_array().unwrap().len(), 100);

    let (code, v) = json(&[
        "bounds", "--which", "all", "-n", "3", "-r", "3", "-s", "1", "-d", "1",
    ]);
    assert_eq!(code, 0);
    let names: Vec<&str> = v["outputs"]["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["er", "m", "theorem1", "gh", "alwz", "theorem2", "trivial_d"]
    );
    assert_eq!(v["outputs"]["skipped"][0]["which"], "claim1");
    assert_eq!(
        v["outputs"]["crossover"]["rows"].as_array().unwrap().len(),
        3
    );

    let out = run(&["bounds", "--which", "er", "-n", "3", "-r", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gen_writes_family_files() {
    let out = run(&["gen", "sunflower", "2", "1", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "x=6\n0 1 2\n0 1 3\n0 1 4\n0 1 5\n"
    );

    let out = run(&["--format", "json", "gen", "transversal", "2", "2"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "{\"ground_size\":4,\"sets\":[[0,2],[0,3],[1,2],[1,3]]}\n"
    );

    let out = run(&["gen", "random-uniform", "30", "3", "60", "--seed", "1"]);
    let expected = std::fs::read_to_string(fixture("random_30_3_60.txt")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);

    let out = run(&["gen", "random-uniform", "30", "3", "60"]);
    assert_eq!(out.status.code(), Some(3));

    let out = run(&[
        "gen",
        "random-l-intersecting",
        "6",
        "3",
        "5",
        "--L",
        "0",
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requested"));
}

#[test]
fn experiment_matches_closed_form() {
    // one set {0} of size 1: P = α
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.txt");
    std::fs::write(&path, "x=1\n0\n").unwrap();
    let path = path.to_string_lossy().into_owned();
    let out = run(&[
        "experiment",
        &path,
        "--alpha-grid",
        "0.1:0.9:0.1",
        "--trials",
        "100000",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("alpha,estimate,stderr,exact"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        let (alpha, est, se, exact) = (row[0], row[1], row[2], row[3]);
        assert!((exact - alpha).abs() < 1e-12);
        assert!(
            (est - exact).abs() <= 3.0 * se,
            "alpha {alpha}: {est} vs {exact} (se {se})"
        );
    }

    let out = run(&[
        "experiment",
        &path,
        "--alpha-grid",
        "0.1:0.9:0.1",
        "--trials",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn encode_audit_and_spread() {
    let (code, v) = json(&[
        "encode-audit",
        &fixture("matching.txt"),
        "--px",
        "3",
        "--d",
        "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["passed"], true);
    assert_eq!(v["outputs"]["encoding"]["bound"], "320");

    let out = run(&[
        "encode-audit",
        &fixture("sunflower_2_1_4.txt"),
        "--px",
        "2",
        "--d",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3), "not 1-intersecting");

    let (code, v) = json(&[
        "spread",
        &fixture("transversal_3_3.txt"),
        "--kappa",
        "3",
        "-d",
        "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["kappa_supremum"]["approx"], 3.0);
    assert_eq!(v["outputs"]["kappa_spread"], true);
    assert_eq!(v["outputs"]["spread_link"]["residual_spread"], true);

    let (code, _) = json(&["spread", &fixture("transversal_3_3.txt"), "--kappa", "4"]);
    assert_eq!(code, 1);

    let (code, v) = json(&["spread", &fixture("triangle.txt"), "--r", "2"]);
    assert_eq!(code, 0);
    assert_eq!(
        v["outputs"]["disjoint_check"]["probability"]["value"],
        "1/2"
    );
    assert_eq!(v["outputs"]["disjoint_check"]["consistent"], true);

    let out = run(&[
        "spread",
        &fixture("triangle.txt"),
        "--alpha",
        "1/2",
        "--trials",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn text_format_and_threads() {
    let out = run(&["--threads", "1", "check", &fixture("triangle.txt")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("subcommand"));
    assert!(text.contains("intersection_profile  [1]"));
    let out = run(&["--threads", "0", "check", &fixture("triangle.txt")]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn stdin_input() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_sunflower"))
        .args(["--format", "json", "find", "-", "--r", "3"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"x=6\n0 1\n2 3\n4 5\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
