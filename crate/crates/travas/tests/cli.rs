// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const HOSPITAL_LOG: &str = "register,visit,blood-test,release;10\n\
                         register,blood-test,visit,release;8\n\
                         register,visit,release;20\n\
                         register,visit,blood-test,blood-test,release;5\n";

fn travas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_travas"))
        .args(args)
        .env_remove("TRAVAS_BASELINE_BUDGET_SECS")
        .env_remove("TRAVAS_BASELINE_MAX_NODES")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, content).unwrap();
    path
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn stats_on_hospital_log() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "hospital.txt", HOSPITAL_LOG);
    let text = stdout(&travas(&["stats", "--input", s(&input)]));
    assert!(text.contains("cases: 43"), "{text}");
    assert!(text.contains("variants: 4"), "{text}");
    assert!(text.contains("events: 157"), "{text}");

    let json: serde_json::Value =
        serde_json::from_str(&stdout(&travas(&["stats", "--input", s(&input), "--json"]))).unwrap();
    assert_eq!(json["cases"], 43);
    assert_eq!(json["activities"], 4);
}

#[test]
fn stats_rejects_empty_log() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "empty.txt", "");
    let out = travas(&["stats", "--input", s(&input)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty log"));
}

#[test]
fn stats_reads_event_csv() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "events.csv",
        "case:concept:name,concept:name,time:timestamp\n\
         1,a,2023-01-01T10:00:00\n1,b,2023-01-01T11:00:00\n2,a,2023-01-02\n",
    );
    let text = stdout(&travas(&["stats", "--input", s(&input)]));
    assert!(
        text.contains("cases: 2") && text.contains("variants: 2"),
        "{text}"
    );
}

#[test]
fn anonymize_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "hospital.txt", HOSPITAL_LOG);
    let run = |name: &str| {
        let output = dir.path().join(name);
        let args = [
            "anonymize",
            "--input",
            s(&input),
            "--epsilon",
            "1",
            "--delta",
            "0.1",
            "--seed",
            "42",
            "--output",
            s(&output),
        ];
        stdout(&travas(&args));
        fs::read(output).unwrap()
    };
    assert_eq!(run("a.txt"), run("b.txt"));
}

#[test]
fn anonymize_rejects_zero_delta() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "hospital.txt", HOSPITAL_LOG);
    let out = travas(&[
        "anonymize",
        "--input",
        s(&input),
        "--epsilon",
        "1",
        "--delta",
        "0",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("only works for δ > 0"));
}

#[test]
fn weak_privacy_keeps_the_log() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "hospital.txt", HOSPITAL_LOG);
    let text = stdout(&travas(&[
        "anonymize",
        "--input",
        s(&input),
        "--epsilon",
        "20",
        "--delta",
        "0.5",
        "--seed",
        "3",
    ]));
    // Written in descending frequency order.
    let expected = "register,visit,release;20\n\
                    register,visit,blood-test,release;10\n\
                    register,blood-test,visit,release;8\n\
                    register,visit,blood-test,blood-test,release;5\n";
    assert_eq!(text, expected);
}

#[test]
fn baseline_via_cli() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "hospital.txt", HOSPITAL_LOG);
    let output = dir.path().join("out.xes");
    let out = travas(&[
        "anonymize",
        "--input",
        s(&input),
        "--epsilon",
        "1",
        "--seed",
        "5",
        "--mechanism",
        "baseline",
        "--output",
        s(&output),
    ]);
    stdout(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cutoff 5"));
    // The XES output loads back.
    stdout(&travas(&["stats", "--input", s(&output)]));
}

#[test]
fn compare_reports_both_metrics() {
    let dir = TempDir::new().unwrap();
    let original = write(&dir, "orig.txt", HOSPITAL_LOG);
    let same = write(&dir, "same.txt", HOSPITAL_LOG);
    let a = write(&dir, "a.txt", "a;1\n");
    let b = write(&dir, "b.txt", "b;1\n");
    let empty = write(&dir, "empty.txt", "");

    let parse = |out: Output| -> serde_json::Value { serde_json::from_str(&stdout(&out)).unwrap() };
    let d = parse(travas(&[
        "compare",
        "--original",
        s(&original),
        "--anonymized",
        s(&same),
    ]));
    assert_eq!(d["rls"], 1.0);
    assert_eq!(d["ald"], 0);
    let d = parse(travas(&[
        "compare",
        "--original",
        s(&a),
        "--anonymized",
        s(&b),
    ]));
    assert_eq!(d["rls"], 0.0);
    assert_eq!(d["ald"], 1);
    let d = parse(travas(&[
        "compare",
        "--original",
        s(&original),
        "--anonymized",
        s(&empty),
    ]));
    assert_eq!(d["rls"], 0.0);
    assert_eq!(d["ald"], 10 * 4 + 8 * 4 + 20 * 3 + 5 * 5);
}

#[test]
fn experiment_shape_and_determinism() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "hospital.txt", HOSPITAL_LOG);
    let config = write(
        &dir,
        "grid.json",
        r#"{"epsilons":[1],"deltas":[0.1],"repetitions":10,"master_seed":7,"mechanisms":["travas"]}"#,
    );
    let run = |name: &str| {
        let output = dir.path().join(name);
        stdout(&travas(&[
            "experiment",
            "--input",
            s(&input),
            "--config",
            s(&config),
            "--output",
            s(&output),
        ]));
        output
    };
    let first = run("first.csv");
    let second = run("second.csv");
    let csv = fs::read_to_string(&first).unwrap();
    assert_eq!(csv, fs::read_to_string(&second).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "mechanism,epsilon,delta,mean_rls,mean_ald,mean_variants,runs,failed"
    );
    assert_eq!(lines.len(), 2);
    assert!(
        lines[1].starts_with("travas,1,0.1,") && lines[1].ends_with(",10,0"),
        "{}",
        lines[1]
    );

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(first.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json[0]["run_count"], 10);
    assert_eq!(json[0]["runs"].as_array().unwrap().len(), 10);
}

#[test]
fn experiment_rejects_invalid_grid() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "hospital.txt", HOSPITAL_LOG);
    let config = write(
        &dir,
        "grid.json",
        r#"{"epsilons":[1],"deltas":[0.1],"repetitions":0,"master_seed":7,"mechanisms":["travas"]}"#,
    );
    let output = dir.path().join("out.csv");
    let out = travas(&[
        "experiment",
        "--input",
        s(&input),
        "--config",
        s(&config),
        "--output",
        s(&output),
    ]);
    assert!(!out.status.success());
    assert!(!output.exists());
}
