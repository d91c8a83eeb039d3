//! Acceptance: the suite runner is deterministic — byte-identical TAP
//! output across repeated runs and across thread counts.

use std::path::Path;
use std::process::Command;

fn run_suite(threads: &str) -> (Vec<u8>, bool) {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let out = Command::new(env!("CARGO_BIN_EXE_iwalg"))
        .arg("suite")
        .arg(&fixtures)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("suite run");
    (out.stdout, out.status.success())
}

#[test]
fn criterion_10_suite_determinism() {
    let (first, ok1) = run_suite("1");
    let (second, ok2) = run_suite("1");
    let (parallel, ok3) = run_suite("4");
    let (parallel2, ok4) = run_suite("4");
    assert!(ok1 && ok2 && ok3 && ok4, "suite run failed");
    assert!(!first.is_empty());
    assert!(
        String::from_utf8_lossy(&first).starts_with("1.."),
        "not a TAP report"
    );
    assert_eq!(first, second, "repeated single-thread runs differ");
    assert_eq!(first, parallel, "thread count changes the report");
    assert_eq!(parallel, parallel2, "repeated parallel runs differ");
    println!("acceptance 10 (suite determinism across runs and thread counts): pass");
}
