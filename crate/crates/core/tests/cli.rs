use std::path::Path;
use std::process::{Command, Output};

fn har(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_har"))
        .args(args)
        .env_remove("HAR_DATA_DIR")
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn har")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let out = har(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(har(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(har(&["sweep", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn one_fold_is_a_usage_error() {
    let out = har(&["sweep", "--folds", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_window_and_patience_are_usage_errors() {
    assert_eq!(har(&["sweep", "--windows", "0.5,-1"]).status.code(), Some(2));
    assert_eq!(har(&["train", "--patience", "10", "--max-epochs", "5"]).status.code(), Some(2));
}

#[test]
fn missing_data_exits_1_with_one_line_diagnostic() {
    let out = har(&["sweep", "--folds", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
    assert!(out.stdout.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.bin");
    let out = har(&["train", "--dataset", path(&missing)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_reproduces_sweep_outputs_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("synth.bin");
    let first = dir.path().join("first");
    let second = dir.path().join("second");

    let out = har(&["synth", "--per-class", "3", "--segment-len", "300", "--out", path(&data)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = har(&[
        "sweep", "--dataset", path(&data), "--windows", "0.25,0.5", "--folds", "3",
        "--max-epochs", "2", "--patience", "2", "--batch", "32", "--threads", "1",
        "--out-dir", path(&first),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    let report = first.join("report.json");
    let out = har(&["report", "--report", path(&report), "--out-dir", path(&second)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for name in ["sweep.csv", "accuracy.svg", "loss.svg", "epochs.svg"] {
        let a = std::fs::read(first.join(name)).unwrap();
        let b = std::fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    let csv = std::fs::read_to_string(first.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "window_sec,k1,k2,acc_mean,acc_std,loss_mean,loss_std,epochs_mean,epochs_std");
    assert!(lines[1].starts_with("0.25,3,5,"));
    assert!(lines[2].starts_with("0.5,7,11,"));
    assert!(first.join("report.meta.json").exists());
}

#[test]
fn train_writes_summary_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("synth.bin");
    let summary = dir.path().join("run.json");
    let ckpt = dir.path().join("model.harm");
    assert!(har(&["synth", "--per-class", "2", "--segment-len", "300", "--out", path(&data)]).status.success());
    let out = har(&[
        "train", "--dataset", path(&data), "--window", "0.5", "--max-epochs", "2", "--patience", "1",
        "--out", path(&summary), "--checkpoint", path(&ckpt),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(run["window_len"], 50);
    let model = har_core::nn::load_model(&ckpt).unwrap();
    assert_eq!(model.window_len(), 50);
}

#[test]
fn ingest_reads_a_protocol_directory() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..40 {
        let activity = if i < 20 { 4 } else { 12 };
        text.push_str(&format!("{:.2} {activity}", 5.0 + i as f64 * 0.01));
        for c in 0..52 {
            if c == 0 && i % 10 != 0 {
                text.push_str(" NaN");
            } else {
                text.push_str(&format!(" {}", ((i * 7 + c * 3) % 11) as f64 - 5.0));
            }
        }
        text.push('\n');
    }
    std::fs::write(dir.path().join("subject101.dat"), &text).unwrap();
    let out_bin = dir.path().join("data.bin");
    let samples = dir.path().join("windows.bin");
    let out = har(&[
        "ingest", "--data-dir", path(dir.path()), "--out", path(&out_bin),
        "--samples-out", path(&samples), "--window", "0.1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = har_core::dataset::read_dataset(&out_bin).unwrap();
    assert_eq!(data.len(), 1);
    assert_eq!(data[0].len(), 40);
    // Two 20-step segments, W = 10, stride 2: 6 windows each.
    assert_eq!(har_core::preprocess::read_samples(&samples).unwrap().len(), 12);
}
