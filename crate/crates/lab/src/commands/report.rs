use std::fs;

use serde_json::{json, Value};

use super::{Outcome, Session, Status};
use crate::cli::ReportArgs;
use crate::error::{LabError, LabResult};

/// Collects `result.json` and `manifest.json` of every stored run into one summary.
/// Nothing is recomputed.
pub fn report(a: &ReportArgs, s: &mut Session) -> LabResult<Outcome> {
    let filter = s.params.pick_opt("command", a.command.clone(), None);
    let runs = s.out.runs();
    let mut dirs: Vec<_> = match fs::read_dir(&runs) {
        Ok(rd) => rd
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .map(|e| e.path())
            .collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(LabError::io(format!("listing {}", runs.display()), e)),
    };
    dirs.sort();
    let mut records = Vec::new();
    let mut skipped = 0usize;
    for dir in dirs {
        let result_path = dir.join("result.json");
        let manifest_path = dir.join("manifest.json");
        // Runs without a manifest were interrupted before completion.
        let (Ok(result_bytes), Ok(manifest_bytes)) =
            (fs::read(&result_path), fs::read(&manifest_path))
        else {
            skipped += 1;
            continue;
        };
        let parse = |bytes: &[u8], path: &std::path::Path| -> LabResult<Value> {
            serde_json::from_slice(bytes).map_err(|e| LabError::Input {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })
        };
        let result = parse(&result_bytes, &result_path)?;
        let manifest = parse(&manifest_bytes, &manifest_path)?;
        let command = result["command"].as_str().unwrap_or_default().to_string();
        if filter.as_ref().is_some_and(|f| *f != command) {
            continue;
        }
        s.params.input_file(&result_path, &result_bytes);
        records.push(json!({
            "run_id": manifest["run_id"],
            "command": command,
            "status": result["status"],
            "started": manifest["started"],
            "parameter_digest": manifest["parameter_digest"],
            "summary": result["summary"],
        }));
    }
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let text = |v: &Value| {
                v.as_str()
                    .map(str::to_string)
                    .unwrap_or_else(|| v.to_string())
            };
            vec![
                text(&r["run_id"]),
                text(&r["command"]),
                text(&r["status"]),
                text(&r["started"]),
                r["summary"].to_string(),
            ]
        })
        .collect();
    s.artifacts.csv(
        "summary.csv",
        &["run_id", "command", "status", "started", "summary"],
        &rows,
    )?;
    s.artifacts.json("summary.json", &records)?;
    let failed = records.iter().filter(|r| r["status"] == "fail").count();
    let mut out = Outcome::new(Status::Ok, json!({ "runs": records, "skipped": skipped }))
        .metric("runs", records.len())
        .metric("failed", failed)
        .metric("skipped", skipped);
    out.lines.push(format!(
        "{} runs ({} failed, {} incomplete skipped)",
        records.len(),
        failed,
        skipped
    ));
    for r in &rows {
        out.lines
            .push(format!("  {:<40} {:<18} {}", r[0], r[1], r[2]));
    }
    Ok(out)
}
