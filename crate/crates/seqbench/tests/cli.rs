//! End-to-end tests of the seqbench binary: exit codes, file outputs, and
//! determinism of the generated artifacts.

use std::path::Path;
use std::process::{Command, Output};

use seqbench::io::{checkpoint, cohort};
use seqbench_core::models::{Architecture, Cell, Connection};

fn seqbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqbench"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn seqbench")
}

fn expect_ok(dir: &Path, args: &[&str]) {
    let out = seqbench(dir, args);
    assert!(
        out.status.success(),
        "seqbench {args:?} exited {:?}:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempdir();
    let unknown = seqbench(dir.path(), &["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(!unknown.stderr.is_empty());

    let no_out = seqbench(dir.path(), &["gen", "--patients", "50"]);
    assert_eq!(no_out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&no_out.stderr).contains("--out"));

    let bad_arch = seqbench(dir.path(), &["hpo", "--arch", "GptZero", "--budget", "1",
                                          "--data-prefix", "d", "--out", "x.jsonl"]);
    assert_eq!(bad_arch.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempdir();
    assert_eq!(seqbench(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(seqbench(dir.path(), &["--version"]).status.code(), Some(0));
}

#[test]
fn missing_input_exits_one_and_names_the_file() {
    let dir = tempdir();
    let out = seqbench(
        dir.path(),
        &["split", "--in", "no-such-cohort.jsonl", "--out-prefix", "data"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("no-such-cohort.jsonl"),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn gen_is_seeded_and_task_aware() {
    let dir = tempdir();
    let d = dir.path();
    expect_ok(d, &["gen", "--patients", "60", "--vocab", "30", "--seed", "5", "--out", "a.jsonl"]);
    expect_ok(d, &["gen", "--patients", "60", "--vocab", "30", "--seed", "5", "--out", "b.jsonl"]);
    expect_ok(d, &["gen", "--patients", "60", "--vocab", "30", "--seed", "5", "--task", "hf",
                   "--out", "c.jsonl"]);

    let a = std::fs::read(d.join("a.jsonl")).unwrap();
    let b = std::fs::read(d.join("b.jsonl")).unwrap();
    let c = std::fs::read(d.join("c.jsonl")).unwrap();
    assert_eq!(a, b, "same seed and task must reproduce the cohort");
    assert_ne!(a, c, "a different task must change the cohort");
}

#[test]
fn label_keeps_cases_and_controls_only() {
    let dir = tempdir();
    let d = dir.path();
    // case: gap 20; control: gap 100; excluded: gap 60; transfer rows must
    // not disturb the gap arithmetic.
    let lines = [
        r#"{"patient_id":"a","admit_day":0,"discharge_day":4,"kind":"inpatient","codes":[1,2]}"#,
        r#"{"patient_id":"a","admit_day":2,"discharge_day":3,"kind":"transfer","codes":[3]}"#,
        r#"{"patient_id":"a","admit_day":24,"discharge_day":30,"kind":"inpatient","codes":[2]}"#,
        r#"{"patient_id":"b","admit_day":0,"discharge_day":6,"kind":"inpatient","codes":[4]}"#,
        r#"{"patient_id":"b","admit_day":106,"discharge_day":110,"kind":"inpatient","codes":[1]}"#,
        r#"{"patient_id":"c","admit_day":0,"discharge_day":2,"kind":"inpatient","codes":[5]}"#,
        r#"{"patient_id":"c","admit_day":62,"discharge_day":70,"kind":"inpatient","codes":[5]}"#,
    ];
    std::fs::write(d.join("enc.jsonl"), lines.join("\n") + "\n").unwrap();

    expect_ok(d, &["label", "--in", "enc.jsonl", "--out", "labeled.jsonl"]);
    let (records, vocab) = cohort::load_cohort(&d.join("labeled.jsonl")).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!((records[0].patient_id.as_str(), records[0].label), ("a", 1));
    assert_eq!((records[1].patient_id.as_str(), records[1].label), ("b", 0));
    // Patient a keeps the index stay and the transfer inside it, but not
    // the readmitting stay itself; b keeps only its index stay.
    assert_eq!(records[0].visits.len(), 2);
    assert_eq!(records[1].visits.len(), 1);
    // Dense ids over the kept patients only: codes 1..=4 plus PAD.
    assert_eq!(vocab.n_ids(), 5);
}

#[test]
fn train_writes_checkpoint_and_history() {
    let dir = tempdir();
    let d = dir.path();
    expect_ok(d, &["gen", "--patients", "120", "--vocab", "40", "--seed", "9",
                   "--out", "cohort.jsonl"]);
    expect_ok(d, &["split", "--in", "cohort.jsonl", "--seed", "9", "--out-prefix", "data"]);
    std::fs::write(
        d.join("train.cfg"),
        "optimizer = adam\nembed_dim = 8\nhidden_size = 8\nmax_epochs = 2\nbatch_size = 64\n",
    )
    .unwrap();

    expect_ok(d, &["train", "--arch", "GRU", "--config", "train.cfg",
                   "--train", "data.train.jsonl", "--valid", "data.valid.jsonl",
                   "--seed", "9", "--out", "model.json"]);

    let (spec, n_ids, params) = checkpoint::load_checkpoint(&d.join("model.json")).unwrap();
    assert_eq!(
        spec.architecture,
        Architecture::Recurrent { cell: Cell::Gru, connection: Connection::Standard }
    );
    assert_eq!(spec.embed_dim, 8);
    assert_eq!(n_ids, 41);
    assert!(params.tensors.contains_key("layer0.w_z"));

    let history = std::fs::read_to_string(d.join("model.history.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(lines.next(), Some("epoch,train_loss,valid_auroc"));
    assert_eq!(lines.count(), 2, "one row per epoch:\n{history}");
}

#[test]
fn bench_renders_exactly_the_requested_rows() {
    let dir = tempdir();
    let d = dir.path();
    expect_ok(d, &["gen", "--patients", "120", "--vocab", "40", "--seed", "3",
                   "--out", "cohort.jsonl"]);
    expect_ok(d, &["split", "--in", "cohort.jsonl", "--seed", "3", "--out-prefix", "data"]);
    expect_ok(d, &["bench", "--archs", "GRU,LR", "--budget", "2", "--data-prefix", "data",
                   "--epochs", "2", "--batch-size", "64", "--seed", "3", "--out", "report.csv"]);

    let report = std::fs::read_to_string(d.join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "model,hf_auroc,readm_auroc");
    assert_eq!(lines.len(), 3, "exactly the two requested rows:\n{report}");
    // Default task is readm, so the hf column stays empty.
    assert!(lines[1].starts_with("GRU,,"), "{report}");
    assert!(lines[2].starts_with("LR,,"), "{report}");
    assert!(d.join("report.GRU.ledger.jsonl").exists());
    assert!(d.join("report.LR.ledger.jsonl").exists());

    // The ledgers re-render to the same report.
    expect_ok(d, &["report", "--ledgers", "report.GRU.ledger.jsonl", "report.LR.ledger.jsonl",
                   "--out", "again.csv"]);
    let again = std::fs::read_to_string(d.join("again.csv")).unwrap();
    assert_eq!(report, again);
}
