//! The `rfimpute` binary: step commands, the manifest they append to, and
//! exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn rfimpute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfimpute")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = rfimpute(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn steps_chain_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let manifest = d.join("manifest.json");
    let m = s(&manifest);
    let (raw, clean, split) = (d.join("raw.csv"), d.join("clean.csv"), d.join("split"));
    let (rf, set, report) = (d.join("rf.json"), d.join("RF1A.csv"), d.join("stats.json"));
    let part = |name: &str| split.join(format!("{name}.csv"));

    ok(&["--seed", "4", "--manifest", m, "generate", "--n", "600", "--out", s(&raw)]);
    ok(&["--manifest", m, "clean", "--in", s(&raw), "--out", s(&clean)]);
    ok(&["--seed", "5", "--manifest", m, "split", "--in", s(&clean), "--out-dir", s(&split)]);
    ok(&[
        "--seed", "6", "--manifest", m, "train", "rf", "--train", s(&part("train")), "--out", s(&rf), "--trees", "5",
    ]);
    ok(&[
        "--seed", "7", "--manifest", m, "impute", "--label", "RF1A", "--in", s(&part("experiment")), "--rf", s(&rf),
        "--exclude-hiv", "--out", s(&set),
    ]);
    ok(&["--seed", "8", "--manifest", m, "impute", "--label", "T", "--in", s(&part("experiment")), "--out", s(&d.join("T.csv"))]);
    ok(&[
        "--seed", "9", "--manifest", m, "assess", "stats", "--target", s(&d.join("T.csv")), "--sets", s(&set), "--out",
        s(&report),
    ]);
    assert!(report.exists() && set.exists());

    let out = rfimpute(&["replay", m, "--work-dir", s(&d.join("again"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("replayed 7 steps"));

    // An edited step no longer matches its recorded configuration hash.
    let text = std::fs::read_to_string(&manifest).unwrap();
    std::fs::write(&manifest, text.replacen("\"n\": 600", "\"n\": 601", 1)).unwrap();
    let out = rfimpute(&["replay", m, "--work-dir", s(&d.join("third"))]);
    assert!(!out.status.success());
}

#[test]
fn missing_seed_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rfimpute(&["generate", "--out", s(&dir.path().join("x.csv"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rfimpute(&["clean", "--in", "/nonexistent/raw.csv", "--out", s(&dir.path().join("c.csv"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_label_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    ok(&["--seed", "1", "generate", "--n", "50", "--out", s(&raw)]);
    let out = rfimpute(&["--seed", "1", "impute", "--label", "XYZ9", "--in", s(&raw), "--out", s(&dir.path().join("o.csv"))]);
    assert_eq!(out.status.code(), Some(2));
}
