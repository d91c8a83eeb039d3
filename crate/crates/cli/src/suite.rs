//! Scenario-suite runner: walks a directory of JSON scenario files, runs
//! each through the shared dispatcher, and emits a TAP report ordered by
//! fixture path regardless of scheduling.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::Value;

use crate::commands::run_command;
use crate::input::{Config, Failure};

#[derive(Deserialize)]
struct Scenario {
    cmd: String,
    /// inline request object, or a path (relative to the scenario file)
    /// of a JSON file holding it
    input: Value,
    #[serde(default)]
    expect: Option<Value>,
}

/// `expect` passes when it is a "subset" of the actual output: objects
/// recursively contained, arrays and leaves equal.
fn subset(expect: &Value, actual: &Value) -> bool {
    match (expect, actual) {
        (Value::Object(e), Value::Object(a)) => e
            .iter()
            .all(|(k, v)| a.get(k).is_some_and(|av| subset(v, av))),
        _ => expect == actual,
    }
}

fn run_scenario(path: &Path, cfg: &Config) -> Result<(), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("read error: {e}"))?;
    let scenario: Scenario =
        serde_json::from_str(&text).map_err(|e| format!("scenario parse error: {e}"))?;
    let input = match scenario.input {
        Value::String(rel) => {
            let p = path.parent().unwrap_or(Path::new(".")).join(rel);
            let t = std::fs::read_to_string(&p)
                .map_err(|e| format!("input read error ({}): {e}", p.display()))?;
            serde_json::from_str(&t).map_err(|e| format!("input parse error: {e}"))?
        }
        other => other,
    };
    let output = run_command(&scenario.cmd, input, cfg).map_err(|e| match e {
        Failure::Schema(ptr, msg) => format!("schema violation at {ptr}: {msg}"),
        Failure::Domain(err) => format!("{err}"),
    })?;
    if let Some(expect) = &scenario.expect {
        if !subset(expect, &output) {
            return Err(format!(
                "expectation mismatch: expected subset {expect}, got {output}"
            ));
        }
    }
    Ok(())
}

fn collect_scenarios(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(std::io::Error::other)?;
        let p = entry.path();
        if p.extension().is_some_and(|e| e == "json")
            && !p
                .file_name()
                .is_some_and(|n| n.to_string_lossy().ends_with(".input.json"))
        {
            out.push(p.to_path_buf());
        }
    }
    out.sort();
    Ok(out)
}

/// Run the suite; returns the TAP report and whether every scenario passed.
pub fn run_suite(dir: &Path, cfg: &Config) -> std::io::Result<(String, bool)> {
    let files = collect_scenarios(dir)?;
    let results: Vec<(String, Result<(), String>)> = files
        .par_iter()
        .map(|p| (p.display().to_string(), run_scenario(p, cfg)))
        .collect();
    let mut report = format!("1..{}\n", results.len());
    let mut all_ok = true;
    for (i, (path, res)) in results.iter().enumerate() {
        match res {
            Ok(()) => report.push_str(&format!("ok {} - {}\n", i + 1, path)),
            Err(msg) => {
                all_ok = false;
                report.push_str(&format!("not ok {} - {} # {}\n", i + 1, path, msg));
            }
        }
    }
    Ok((report, all_ok))
}
