//! Black-box tests for the `threatloom` binary: exit statuses, summary
//! lines, written report files, and the stdout contracts of each
//! subcommand.

use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_threatloom");

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    path.to_str().expect("fixture path is UTF-8").to_owned()
}

const CORPUS: [&str; 9] = [
    "linddun-un.tmc",
    "linddun-linking.tmc",
    "legacy-extensions.tmc",
    "enisa-2016-legal.tmc",
    "assets-automotive.tmc",
    "embraces-2023.tmc",
    "assoc-exemplar.tmc",
    "incidents.tmc",
    "table1.tmc",
];

/// Runs one subcommand with `--catalog` flags for each fixture name in
/// `catalogs`, then the raw arguments in `rest`.
fn run_sub(sub: &str, catalogs: &[&str], rest: &[&str]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.arg(sub);
    for name in catalogs {
        cmd.arg("--catalog");
        cmd.arg(fixture(name));
    }
    cmd.args(rest);
    cmd.output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn validate_accepts_the_bundled_corpus() {
    let out = run_sub("validate", &CORPUS, &[]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("0 error(s), 0 warning(s)"));
}

#[test]
fn validate_names_dangling_embrace_ids() {
    let out = run_sub("validate", &["embraces-2023.tmc"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("owasp.access-modify"));
}

#[test]
fn validate_notes_duplicate_labels_across_sources() {
    let out = run_sub(
        "validate",
        &["legacy-extensions.tmc", "enisa-2016-legal.tmc"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("failure to meet contractual requirements"));
}

#[test]
fn validate_missing_file_is_an_io_error() {
    let out = Command::new(BIN)
        .args(["validate", "--catalog", "/nonexistent/missing.tmc"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_strict_turns_warnings_into_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("warned.tmc");
    std::fs::write(
        &path,
        "source s \"S\" { kind: external; derived_from: [s]; }\n",
    )
    .unwrap();
    let lenient = Command::new(BIN)
        .args(["validate", "--catalog", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(lenient.status.code(), Some(0), "stderr: {}", stderr(&lenient));
    let strict = Command::new(BIN)
        .args(["validate", "--catalog", path.to_str().unwrap(), "--strict"])
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn elicit_writes_reports_and_prints_the_summary_line() {
    let dir = tempfile::tempdir().unwrap();
    let out_flag = dir.path().to_str().unwrap();
    let out = run_sub(
        "elicit",
        &CORPUS,
        &["--domain", "automotive", "--out", out_flag],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "threats=23 assets=43 domain_threats=251\n");

    let uncovered_warnings = stderr(&out)
        .lines()
        .filter(|l| l.contains("has no association row"))
        .count();
    assert_eq!(uncovered_warnings, 13);

    let markdown = std::fs::read_to_string(dir.path().join("threats.md")).unwrap();
    assert!(markdown.contains("| Category | Threat | Source | Provenance |"));
    assert!(markdown.contains("Unawareness of processing"));

    let csv = std::fs::read_to_string(dir.path().join("matrix.csv")).unwrap();
    assert_eq!(csv.lines().count(), 252, "header plus one line per pair");

    let json = std::fs::read_to_string(dir.path().join("result.json")).unwrap();
    assert!(json.contains("\"count\": 251"));
}

#[test]
fn elicit_reruns_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = run_sub(
            "elicit",
            &CORPUS,
            &["--domain", "automotive", "--out", dir.path().to_str().unwrap()],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["threats.md", "matrix.csv", "result.json"] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between reruns");
    }
}

#[test]
fn elicit_strict_fails_on_uncovered_threats() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_sub(
        "elicit",
        &CORPUS,
        &[
            "--domain",
            "automotive",
            "--strict",
            "--out",
            dir.path().to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("has no association row"));
}

#[test]
fn elicit_single_format_writes_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_sub(
        "elicit",
        &CORPUS,
        &[
            "--domain",
            "automotive",
            "--format",
            "csv",
            "--out",
            dir.path().to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("matrix.csv").exists());
    assert!(!dir.path().join("threats.md").exists());
    assert!(!dir.path().join("result.json").exists());
}

#[test]
fn elicit_unknown_domain_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_sub(
        "elicit",
        &CORPUS,
        &["--domain", "maritime", "--out", dir.path().to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("maritime"));
}

#[test]
fn elicit_source_filter_narrows_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_sub(
        "elicit",
        &CORPUS,
        &[
            "--domain",
            "automotive",
            "--source",
            "linddun",
            "--out",
            dir.path().to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("threats=17 "));
}

#[test]
fn elicit_rejects_unknown_property_values() {
    let out = run_sub("elicit", &CORPUS, &["--domain", "automotive", "--property", "fuzzy"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn paths_lists_sorted_minimal_paths() {
    let out = run_sub("paths", &["linddun-linking.tmc"], &["linddun.i"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "linddun.i.1\nlinddun.i.2.1, linddun.i.2.2\n"
    );
}

#[test]
fn paths_projection_level_does_not_change_the_listing() {
    let full = run_sub("paths", &["linddun-linking.tmc"], &["linddun.l"]);
    let basic = run_sub(
        "paths",
        &["linddun-linking.tmc"],
        &["linddun.l", "--level", "basic"],
    );
    assert_eq!(full.status.code(), Some(0));
    assert_eq!(stdout(&full), stdout(&basic));
    assert!(!stdout(&full).is_empty());
}

#[test]
fn paths_unknown_tree_is_a_domain_error() {
    let out = run_sub("paths", &["linddun-un.tmc"], &["nosuch.tree"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nosuch.tree"));
}

#[test]
fn paths_rejects_unknown_detail_levels() {
    let out = run_sub(
        "paths",
        &["linddun-un.tmc"],
        &["linddun.u", "--level", "verbose"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_renders_the_frequency_table() {
    let out = run_sub("stats", &CORPUS, &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("| Threat | Incidents | Incident ids |"));
    assert_eq!(lines.next(), Some("| --- | --- | --- |"));
    assert!(text.contains("| linddun.n.1.1 | 2 |"));
    // 23 canonical threats, one row each, plus the two header lines.
    assert_eq!(text.lines().count(), 25);
}

#[test]
fn stats_without_incidents_is_an_all_zero_table() {
    let out = run_sub("stats", &["table1.tmc"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 25);
    for row in text.lines().skip(2) {
        assert!(row.contains("| 0 |"), "unexpected row {row:?}");
    }
}

#[test]
fn fmt_canonicalizes_and_is_idempotent() {
    let once = run_sub("fmt", &["incidents.tmc"], &[]);
    assert_eq!(once.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("canon.tmc");
    std::fs::write(&path, stdout(&once)).unwrap();
    let twice = Command::new(BIN)
        .args(["fmt", "--catalog", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(twice.status.code(), Some(0));
    assert_eq!(stdout(&once), stdout(&twice));
}

#[test]
fn missing_catalog_flag_is_a_usage_error() {
    let out = Command::new(BIN).arg("validate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
