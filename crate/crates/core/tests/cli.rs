mod common;

use std::path::Path;
use std::process::{Command, Output};

use tutorweb::document::ContentDocument;

fn tutorweb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tutorweb"))
        .args(args)
        .env_remove("TUTORWEB_DATA_DIR")
        .env_remove("TUTORWEB_PORT")
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("d.rec");
    let out = tutorweb(&["simulate", "--students", "184", "--seed", "1", "--out", p(&rec)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("d.rec.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["params"]["n_students"], 184);

    let json = dir.path().join("a.json");
    let out = tutorweb(&["analyze", "--in", p(&rec), "--out", p(&json)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let df_of = |term: &str| -> usize {
        let line = text.lines().find(|l| l.split_whitespace().next() == Some(term)).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert_eq!(
        [df_of("treatment"), df_of("math"), df_of("treatment:math"), df_of("exam"), df_of("student")],
        [1, 1, 1, 3, 182]
    );
    assert!(text.contains("removed treatment:math"));

    // the record file agrees with the printed table
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    let rows = v["table"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for row in rows {
        assert_eq!(row["df"], df_of(row["term"].as_str().unwrap()));
    }
    assert_eq!(v["elimination"]["trace"][0]["term"], "treatment:math");

    // same seed, same bytes
    let again = dir.path().join("e.rec");
    tutorweb(&["simulate", "--seed", "1", "--out", p(&again)]);
    assert_eq!(std::fs::read(&rec).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn missing_input_fails() {
    let out = tutorweb(&["analyze", "--in", "/definitely/missing.rec"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors() {
    assert_eq!(tutorweb(&["bogus"]).status.code(), Some(2));
    assert_eq!(tutorweb(&["simulate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(tutorweb(&[]).status.code(), Some(2));
    assert_eq!(tutorweb(&["simulate", "--periods", "3"]).status.code(), Some(1));
}

#[test]
fn import_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (content, bank, lecture, _) = common::quiz_content(4);
    let src = dir.path().join("content.in.json");
    let original = ContentDocument::export(&content, &bank);
    original.save(&src).unwrap();
    let data = dir.path().join("data");
    let out = tutorweb(&["import", "--data-dir", p(&data), "--in", p(&src)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let exported = dir.path().join("content.out.json");
    assert!(tutorweb(&["export", "--data-dir", p(&data), "--out", p(&exported)]).status.success());
    assert_eq!(ContentDocument::load(&exported).unwrap(), original);

    // a bare item list with a template lands in the same store
    let items = dir.path().join("items.json");
    std::fs::write(
        &items,
        serde_json::json!([{
            "id": "t-add", "lecture": lecture.0, "stem_template": "{a} + 1 = ?",
            "parameter_specs": {"a": {"min": 1, "max": 3, "step": 1}},
            "answer_expressions": [{"expression": "a + 1", "correct": true}, {"expression": "a", "correct": false}]
        }])
        .to_string(),
    )
    .unwrap();
    assert!(tutorweb(&["import", "--data-dir", p(&data), "--in", p(&items)]).status.success());
    let out = tutorweb(&["stats", "--data-dir", p(&data), "--lecture", &lecture.0]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
    assert!(text.contains("t-add"));
    // importing the same ids again fails and leaves the store alone
    assert_eq!(tutorweb(&["import", "--data-dir", p(&data), "--in", p(&items)]).status.code(), Some(1));
}
