//! End-to-end tests of the `facteval` binary: exit codes, golden
//! mock-backed runs, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

fn facteval(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facteval"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write_toy_dataset(dir: &Path) {
    let lines = r#"{"id":"a1","question":"问一","reference":"参考甲。","answer":"回答甲一。","label":"consistent","source":"m1"}
{"id":"a2","question":"问二","reference":"参考乙。","answer":"回答乙二。","label":"inconsistent","error_types":["Hallu"],"source":"m1"}
{"id":"a3","question":"问三","reference":"参考丙。","answer":"回答丙三。","label":"inconsistent","error_types":["LCaus","KCont"],"source":"m2"}
{"id":"a4","question":"问四","reference":"参考丁。","answer":"回答丁四。","label":"consistent","source":"m2"}
"#;
    std::fs::write(dir.join("toy.jsonl"), lines).unwrap();
}

/// Mock script: decomposition echoes one segment per answer; answers 甲/丁
/// pass both stages, 乙/丙 fail the fact stage.
fn write_mock_script(dir: &Path) {
    let script = r#"[
  {"match":"regex","pattern":"(?s)回答拆分助手.*回答甲一","response":"1. 回答甲一。"},
  {"match":"regex","pattern":"(?s)回答拆分助手.*回答乙二","response":"1. 回答乙二。"},
  {"match":"regex","pattern":"(?s)回答拆分助手.*回答丙三","response":"1. 回答丙三。"},
  {"match":"regex","pattern":"(?s)回答拆分助手.*回答丁四","response":"1. 回答丁四。"},
  {"match":"regex","pattern":"(?s)事实一致性评估员.*回答甲一","response":"有依据。\nVERDICT: 一致"},
  {"match":"regex","pattern":"(?s)事实一致性评估员.*回答丁四","response":"有依据。\nVERDICT: 一致"},
  {"match":"substring","pattern":"事实一致性评估员","response":"无依据。\nVERDICT: 不一致"},
  {"match":"substring","pattern":"逻辑一致性评估员","response":"逻辑成立。\nVERDICT: 一致"}
]"#;
    std::fs::write(dir.join("mock.json"), script).unwrap();
}

#[test]
fn no_arguments_prints_usage_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let output = facteval(dir.path(), &[]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("Usage"));
}

#[test]
fn help_exits_0_without_touching_anything() {
    let dir = tempfile::tempdir().unwrap();
    let output = facteval(dir.path(), &["--help"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("bench"));
    // no cache directory or other files created
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn stats_reports_counts_and_positive_rate() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_dataset(dir.path());
    let output = facteval(
        dir.path(),
        &["stats", "--dataset", "toy.jsonl", "--distribution"],
    );
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("Num. Samples"), "{text}");
    assert!(text.contains("4"));
    assert!(text.contains("50.0%"));
    assert!(text.contains("Hallucination"));
    // config digest line goes to stderr
    assert!(stderr(&output).contains("facteval config"));
}

#[test]
fn missing_dataset_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = facteval(dir.path(), &["stats", "--dataset", "absent.jsonl"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_schema_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_dataset(dir.path());
    let output = facteval(
        dir.path(),
        &["stats", "--dataset", "toy.jsonl", "--schema", "bogus"],
    );
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn replay_on_cold_cache_is_a_backend_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_dataset(dir.path());
    let output = facteval(
        dir.path(),
        &[
            "bench",
            "--backend",
            "replay",
            "--dataset",
            "toy.jsonl",
            "--out",
            "run",
        ],
    );
    assert_eq!(output.status.code(), Some(3), "{}", stderr(&output));
}

#[test]
fn bench_with_mock_is_deterministic_and_correct() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_dataset(dir.path());
    write_mock_script(dir.path());
    let args = [
        "bench",
        "--backend",
        "mock:mock.json",
        "--dataset",
        "toy.jsonl",
        "--variant",
        "full",
        "--out",
        "run",
    ];

    let output = facteval(dir.path(), &args);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/report.json")).unwrap())
            .unwrap();
    // every prediction matches its gold label
    assert_eq!(report["overall"]["accuracy"], 1.0);
    assert_eq!(report["completed"], 4);
    assert_eq!(report["per_error_type"]["Hallu"]["accuracy"], 1.0);
    assert_eq!(report["per_source"]["m2"]["total"], 2);
    let table = std::fs::read_to_string(dir.path().join("run/report.txt")).unwrap();
    assert!(table.contains("100.00"), "{table}");

    let first_report = std::fs::read(dir.path().join("run/report.json")).unwrap();
    let first_records = std::fs::read(dir.path().join("run/records.jsonl")).unwrap();

    // identical argv again: byte-identical outputs (records are reused)
    let rerun = facteval(dir.path(), &args);
    assert_eq!(rerun.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("run/report.json")).unwrap(),
        first_report
    );
    assert_eq!(
        std::fs::read(dir.path().join("run/records.jsonl")).unwrap(),
        first_records
    );

    // different worker bound, fresh directory: same bytes
    let mut args8: Vec<&str> = args.to_vec();
    args8[8] = "run8";
    args8.push("--concurrency");
    args8.push("8");
    let run8 = facteval(dir.path(), &args8);
    assert_eq!(run8.status.code(), Some(0), "{}", stderr(&run8));
    assert_eq!(
        std::fs::read(dir.path().join("run8/report.json")).unwrap(),
        first_report
    );
}

#[test]
fn evaluate_emits_predictions_and_partial_failures_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_dataset(dir.path());
    // This script leaves 回答丙三 without a parseable fact verdict.
    let script = r#"[
  {"match":"substring","pattern":"回答拆分助手","response":"1. 一个片段。"},
  {"match":"regex","pattern":"(?s)事实一致性评估员.*一个片段","response":"VERDICT: 一致"},
  {"match":"substring","pattern":"逻辑一致性评估员","response":"VERDICT: 一致"}
]"#;
    std::fs::write(dir.path().join("mock.json"), script).unwrap();
    let ok = facteval(
        dir.path(),
        &[
            "evaluate",
            "--backend",
            "mock:mock.json",
            "--dataset",
            "toy.jsonl",
            "--records",
            "records.jsonl",
        ],
    );
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let predictions: Vec<serde_json::Value> = stdout(&ok)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(predictions.len(), 4);
    assert!(predictions.iter().all(|p| p["predicted"] == "consistent"));

    // Now a script where one sample's verdict never parses: exit 4.
    let partial_script = r#"[
  {"match":"substring","pattern":"回答拆分助手","response":"1. 一个片段。"},
  {"match":"regex","pattern":"(?s)事实一致性评估员.*一个片段","response":"VERDICT: 一致"},
  {"match":"substring","pattern":"逻辑一致性评估员","response":"VERDICT: 一致"}
]"#;
    let broken = r#"{"id":"b1","question":"问","reference":"参。","answer":"好回答。","label":"consistent","source":"m"}
{"id":"b2","question":"问","reference":"参。","answer":"坏回答。","label":"consistent","source":"m"}
"#;
    std::fs::write(dir.path().join("mock2.json"), partial_script.replace(
        "{\"match\":\"substring\",\"pattern\":\"回答拆分助手\",\"response\":\"1. 一个片段。\"}",
        "{\"match\":\"regex\",\"pattern\":\"(?s)回答拆分助手.*坏回答\",\"response\":\"没有列表\"},{\"match\":\"substring\",\"pattern\":\"回答拆分助手\",\"response\":\"1. 一个片段。\"}",
    ))
    .unwrap();
    std::fs::write(dir.path().join("broken.jsonl"), broken).unwrap();
    let partial = facteval(
        dir.path(),
        &[
            "evaluate",
            "--backend",
            "mock:mock2.json",
            "--dataset",
            "broken.jsonl",
            "--records",
            "records2.jsonl",
        ],
    );
    assert_eq!(partial.status.code(), Some(4), "{}", stderr(&partial));
    assert!(stderr(&partial).contains("b2"));
}

#[test]
fn generate_produces_loadable_dataset() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_dataset(dir.path());
    let script = r#"[
  {"match":"substring","pattern":"反义词","response":"```json\n{\"reasoning\": \"反义替换\", \"answer\": \"被改写的矛盾回答。\"}\n```"},
  {"match":"substring","pattern":"因果","response":"```json\n{\"reasoning\": \"颠倒因果\", \"answer\": \"被改写的因果回答。\"}\n```"},
  {"match":"substring","pattern":"","response":"```json\n{\"reasoning\": \"通用改写\", \"answer\": \"新的改写回答。\"}\n```"}
]"#;
    std::fs::write(dir.path().join("gen.json"), script).unwrap();
    let output = facteval(
        dir.path(),
        &[
            "generate",
            "--backend",
            "mock:gen.json",
            "--corpus",
            "toy.jsonl",
            "--coverage",
            "KCont=2,LCaus=1",
            "--augment",
            "paraphrase=1",
            "--seed",
            "7",
            "--out",
            "generated.jsonl",
        ],
    );
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let stats = facteval(dir.path(), &["stats", "--dataset", "generated.jsonl"]);
    assert_eq!(stats.status.code(), Some(0), "{}", stderr(&stats));
    let text = std::fs::read_to_string(dir.path().join("generated.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("\"reasoning\""));
    assert!(text.contains("\"KCont\""));
    assert!(text.contains("\"LCaus\""));
}

#[test]
fn offline_report_and_compare_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_dataset(dir.path());
    write_mock_script(dir.path());
    let bench = facteval(
        dir.path(),
        &[
            "bench",
            "--backend",
            "mock:mock.json",
            "--dataset",
            "toy.jsonl",
            "--out",
            "run",
        ],
    );
    assert_eq!(bench.status.code(), Some(0), "{}", stderr(&bench));

    let report = facteval(
        dir.path(),
        &[
            "report",
            "--records",
            "run/records.jsonl",
            "--dataset",
            "toy.jsonl",
            "--format",
            "machine",
            "--variant",
            "full",
            "--out",
            "rebuilt.json",
        ],
    );
    assert_eq!(report.status.code(), Some(0), "{}", stderr(&report));
    let original: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run/report.json")).unwrap())
            .unwrap();
    let rebuilt: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rebuilt.json")).unwrap())
            .unwrap();
    assert_eq!(rebuilt["overall"], original["overall"]);
    assert_eq!(rebuilt["per_error_type"], original["per_error_type"]);
    assert_eq!(rebuilt["config_digest"], original["config_digest"]);

    let compare = facteval(
        dir.path(),
        &[
            "compare",
            "--report",
            "run/report.json",
            "--report",
            "rebuilt.json",
        ],
    );
    assert_eq!(compare.status.code(), Some(0), "{}", stderr(&compare));
    assert!(stdout(&compare).contains("+0.00"));
}

#[test]
fn locale_flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    write_toy_dataset(dir.path());
    let output = Command::new(env!("CARGO_BIN_EXE_facteval"))
        .current_dir(dir.path())
        .env("FACTEVAL_LOCALE", "zh")
        .args(["stats", "--dataset", "toy.jsonl", "--locale", "en"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stderr(&output).contains("locale=en"));
}
