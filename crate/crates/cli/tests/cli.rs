//! End-to-end tests against the built binary: output schemas, exit codes,
//! determinism, and witness replay through the library API.

use mhg_core::metric::MetricSpace;
use mhg_core::sumop::sum_m;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mhg"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

struct Fixtures {
    _dir: TempDir,
    params: PathBuf,
    bipartite: PathBuf,
    henson_params: PathBuf,
    point: PathBuf,
    pair3: PathBuf,
}

fn fixtures() -> Fixtures {
    let dir = TempDir::new().unwrap();
    let write = |name: &str, text: &str| -> PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        path
    };
    Fixtures {
        params: write("p.json", r#"{"delta":3,"k1":1,"k2":3,"c0":10,"c1":11}"#),
        bipartite: write("bip.json", r#"{"delta":3,"k1":"inf","k2":0,"c0":8,"c1":7}"#),
        henson_params: write(
            "henson.json",
            r#"{"delta":3,"k1":2,"k2":3,"c0":10,"c1":11,"henson":[{"n":3,"upper":[3,3,3]}]}"#,
        ),
        point: write("pt.json", r#"{"n":1,"upper":[]}"#),
        pair3: write("pair3.json", r#"{"n":2,"upper":[3]}"#),
        _dir: dir,
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_classifies_and_exits() {
    let f = fixtures();
    let out = run(&["validate", "--params", path(&f.params)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["case"], "c");

    let out = run(&["validate", "--params", path(&f.bipartite)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["case"], "a");

    // Inline flags, rejected: 3*K2 = 3 < 2*delta = 6 must be named.
    let out = run(&[
        "validate", "--delta", "3", "--k1", "1", "--k2", "1", "--c0", "10", "--c1", "9",
    ]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["status"], "fail");
    let text = v["witness"].to_string();
    assert!(text.contains("3*K2"), "{text}");
}

#[test]
fn magic_reports_window_or_failure() {
    let f = fixtures();
    let out = run(&["magic", "--params", path(&f.params)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["lo"], 2);
    assert_eq!(v["hi"], 3);
    assert_eq!(v["valid"], serde_json::json!([2, 3]));
    assert_eq!(v["default"], 2);

    let out = run(&["magic", "--params", path(&f.bipartite)]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["status"], "fail");

    let out = run(&["magic", "--params", path(&f.henson_params)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["excluded"], serde_json::json!([3]));
    assert_eq!(v["valid"], serde_json::json!([2]));
}

#[test]
fn profile_output_and_determinism() {
    let f = fixtures();
    let out = run(&["profile", "--params", path(&f.params), "--max-size", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["profile"], serde_json::json!([1]));

    let out = run(&["profile", "--params", path(&f.params), "--max-size", "4"]);
    assert_eq!(
        stdout_json(&out)["profile"],
        serde_json::json!([1, 1, 3, 9, 48])
    );

    // Byte-identical output across worker counts.
    let one = run(&[
        "profile",
        "--params",
        path(&f.params),
        "--max-size",
        "5",
        "--jobs",
        "1",
    ]);
    let many = run(&[
        "profile",
        "--params",
        path(&f.params),
        "--max-size",
        "5",
        "--jobs",
        "4",
    ]);
    assert_eq!(one.stdout, many.stdout);

    let csv = run(&[
        "profile",
        "--params",
        path(&f.params),
        "--max-size",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(
        String::from_utf8_lossy(&csv.stdout),
        "n,count\n0,1\n1,1\n2,3\n"
    );
}

#[test]
fn enumerate_dumps_jsonl() {
    let f = fixtures();
    let out = run(&["enumerate", "--params", path(&f.params), "--max-size", "2"]);
    assert_eq!(code(&out), 0);
    let lines: Vec<Value> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 5);
    // Every line replays to a valid age member with the stated code.
    for line in &lines {
        let n = line["n"].as_u64().unwrap() as usize;
        let upper: Vec<u32> = line["upper"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap() as u32)
            .collect();
        let sp = MetricSpace::new(n, upper).unwrap();
        assert_eq!(
            sp.canonical_code().to_string(),
            line["code"].as_str().unwrap()
        );
    }
}

#[test]
fn census_uses_default_magic_m() {
    let f = fixtures();
    let out = run(&["census", "--params", path(&f.params), "--max-size", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["census"], serde_json::json!([1, 2, 6]));

    let out = run(&[
        "census",
        "--params",
        path(&f.params),
        "--m",
        "3",
        "--max-size",
        "3",
    ]);
    assert_eq!(stdout_json(&out)["census"], serde_json::json!([1, 2, 6]));

    // No magic window at all: report and exit 1.
    let out = run(&["census", "--params", path(&f.bipartite), "--max-size", "2"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn sum_and_decompose_round_trip() {
    let f = fixtures();
    let out = run(&["sum", "--m", "2", path(&f.point), path(&f.point)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["space"], serde_json::json!({"n": 2, "upper": [2]}));

    let out = run(&["decompose", "--m", "2", path(&f.pair3)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["codes"], serde_json::json!(["2:3"]));

    let out = run(&["sum", "--m", "1", path(&f.pair3), path(&f.point)]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["status"], "fail");
}

#[test]
fn closure_failure_witness_replays() {
    let f = fixtures();
    let out = run(&[
        "verify",
        "closure",
        "--params",
        path(&f.params),
        "--m",
        "1",
        "--max-size",
        "4",
    ]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["status"], "fail");
    let read =
        |key: &str| -> MetricSpace { serde_json::from_value(v["witness"][key].clone()).unwrap() };
    let a = read("a");
    let b = read("b");
    assert_eq!(
        sum_m(&a, &b, 1).unwrap_err().to_string(),
        v["witness"]["violation"]
            .as_str()
            .unwrap()
            .trim_start_matches("sum is not metric: ")
    );
}

#[test]
fn henson_closure_failure_names_constraint() {
    let f = fixtures();
    let out = run(&[
        "verify",
        "closure",
        "--params",
        path(&f.henson_params),
        "--m",
        "3",
        "--max-size",
        "4",
    ]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(
        v["witness"]["sum"],
        serde_json::json!({"n": 3, "upper": [3, 3, 3]})
    );
    // And the valid value passes.
    let out = run(&[
        "verify",
        "closure",
        "--params",
        path(&f.henson_params),
        "--m",
        "2",
        "--max-size",
        "4",
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn verify_suite_passes_on_running_example() {
    let f = fixtures();
    for m in ["2", "3"] {
        let out = run(&[
            "verify",
            "freeness",
            "--params",
            path(&f.params),
            "--m",
            m,
            "--max-size",
            "3",
        ]);
        assert_eq!(code(&out), 0, "freeness M={m}");
        let out = run(&[
            "verify",
            "hilbert",
            "--params",
            path(&f.params),
            "--m",
            m,
            "--max-size",
            "4",
        ]);
        assert_eq!(code(&out), 0, "hilbert M={m}");
        assert_eq!(stdout_json(&out)["status"], "pass");
        let out = run(&[
            "verify",
            "polynomial",
            "--params",
            path(&f.params),
            "--m",
            m,
            "--max-size",
            "3",
        ]);
        assert_eq!(code(&out), 0, "polynomial M={m}");
    }
    let out = run(&[
        "verify",
        "oracle",
        "--params",
        path(&f.params),
        "--max-size",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["status"], "pass");
}

#[test]
fn antipodal_commands() {
    let out = run(&["antipodal", "profile", "--max-size", "8"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout_json(&out)["profile"],
        serde_json::json!([1, 1, 3, 3, 6, 6, 10, 10, 15])
    );
    let out = run(&["antipodal", "verify", "--max-size", "5"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["status"], "pass");
}

#[test]
fn triangles_lists_forbidden_set() {
    let f = fixtures();
    let out = run(&["triangles", "--params", path(&f.bipartite)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let list = v["forbidden"].as_array().unwrap();
    assert!(list
        .iter()
        .any(|t| t["sides"] == serde_json::json!([1, 1, 1])));
    // The running example forbids nothing with sides <= 3.
    let out = run(&["triangles", "--params", path(&f.params)]);
    assert_eq!(stdout_json(&out)["forbidden"], serde_json::json!([]));
}

#[test]
fn invalid_input_exits_two() {
    let f = fixtures();
    let out = run(&["profile", "--params", "/definitely/not/here.json"]);
    assert_eq!(code(&out), 2);

    let bad = f._dir.path().join("bad.json");
    fs::write(&bad, r#"{"delta":2,"k1":1,"k2":1,"c0":5,"c1":5}"#).unwrap();
    let out = run(&["validate", "--params", path(&bad)]);
    assert_eq!(code(&out), 2);

    let out = run(&["validate", "--delta", "3", "--k1", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn resource_limit_exits_three() {
    let f = fixtures();
    let out = run(&[
        "profile",
        "--params",
        path(&f.params),
        "--max-size",
        "3",
        "--budget-types",
        "2",
    ]);
    assert_eq!(code(&out), 3);
}
