use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FIXTURES: [&str; 3] = ["spin_half", "three_box", "measurement"];

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn histories(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_histories")).args(args).output().expect("binary runs")
}

fn run_fixture(name: &str, format: &str) -> Output {
    let path = root().join("fixtures").join(format!("{name}.json"));
    histories(&["run", path.to_str().unwrap(), "--format", format])
}

fn golden(name: &str, ext: &str) -> PathBuf {
    root().join("tests").join("golden").join(format!("{name}.{ext}"))
}

/// Set `UPDATE_GOLDEN=1` to rewrite the files after checking the new output by hand.
fn check_golden(path: &Path, actual: &[u8]) {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, actual).unwrap();
        return;
    }
    let expected = std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    if expected != actual {
        panic!(
            "{} differs\n--- expected\n{}\n--- actual\n{}",
            path.display(),
            String::from_utf8_lossy(&expected),
            String::from_utf8_lossy(actual)
        );
    }
}

#[test]
fn fixtures_match_goldens() {
    for name in FIXTURES {
        for (format, ext) in [("text", "txt"), ("machine", "json")] {
            let out = run_fixture(name, format);
            assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
            check_golden(&golden(name, ext), &out.stdout);
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for name in FIXTURES {
        for format in ["text", "machine"] {
            assert_eq!(run_fixture(name, format).stdout, run_fixture(name, format).stdout);
        }
    }
}

#[test]
fn machine_output_is_json() {
    let out = run_fixture("spin_half", "machine");
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["sections"].as_array().unwrap().len(), 13);
    assert_eq!(v["sections"][0]["status"], "MEANINGLESS");
}

#[test]
fn warnings_go_to_stderr() {
    let out = run_fixture("three_box", "text");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().filter(|l| l.starts_with("warning:")).count(), 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.txt");
    let path = root().join("fixtures").join("spin_half.json");
    let out = histories(&["run", path.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), std::fs::read(golden("spin_half", "txt")).unwrap());
}

#[test]
fn scenario_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("missing.json", None),
        ("syntax.json", Some("{ \"schema\": 1, ")),
        (
            "unknown.json",
            Some(
                r#"{ "schema": 1, "dimension": 2, "commands": [{ "command": "conjunction", "left": "a", "right": "b" }] }"#,
            ),
        ),
        (
            "dims.json",
            Some(
                r#"{ "schema": 1, "dimension": 3, "kets": { "a": [[1, 0], [0, 0]] }, "pdis": { "p": { "members": [{ "label": "a", "ket": "a" }] } } }"#,
            ),
        ),
    ];
    for (name, body) in cases {
        let path = dir.path().join(name);
        if let Some(body) = body {
            std::fs::write(&path, body).unwrap();
        }
        let out = histories(&["run", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(out.stdout.is_empty());
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{name}");
    }
}

#[test]
fn execution_errors_exit_3() {
    // explicit propagator that is not unitary
    let body = r#"{
      "schema": 1, "dimension": 2,
      "kets": { "a": [[1, 0], [0, 0]] },
      "operators": { "u": [[[2, 0], [0, 0]], [[0, 0], [1, 0]]] },
      "pdis": { "p": { "members": [{ "label": "a", "ket": "a" }, { "label": "not a", "rest": true }] } },
      "families": { "f": { "initial": { "ket": "a" }, "times": [0, 1], "dynamics": { "propagators": ["u"] }, "events": ["p"] } },
      "commands": [{ "command": "probabilities", "family": "f" }]
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, body).unwrap();
    let out = histories(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("no").join("such").join("dir.txt");
    let path = root().join("fixtures").join("spin_half.json");
    let out = histories(&["run", path.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
