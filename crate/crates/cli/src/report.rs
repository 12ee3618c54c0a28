//! Aggregation of report.json files found in a directory and its immediate
//! subdirectories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
struct Summary {
    experiment: String,
    mode: String,
    passed: bool,
    #[serde(default)]
    failed_checks: Vec<String>,
}

#[derive(Debug)]
pub struct Entry {
    pub path: PathBuf,
    pub experiment: String,
    pub mode: String,
    pub passed: bool,
    pub failed_checks: Vec<String>,
}

fn candidates(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    let mut found = Vec::new();
    let top = dir.join("report.json");
    if top.is_file() {
        found.push(top);
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir).map_err(io)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    subdirs.sort();
    found.extend(subdirs.into_iter().map(|d| d.join("report.json")).filter(|p| p.is_file()));
    Ok(found)
}

pub fn collect(dir: &Path) -> Result<Vec<Entry>, CliError> {
    let paths = candidates(dir)?;
    if paths.is_empty() {
        return Err(CliError::Precondition(format!("no report.json in {}", dir.display())));
    }
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let s: Summary = serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            Ok(Entry { path, experiment: s.experiment, mode: s.mode, passed: s.passed, failed_checks: s.failed_checks })
        })
        .collect()
}

pub fn print(entries: &[Entry]) {
    for e in entries {
        let tag = if e.passed { "PASS" } else { "FAIL" };
        println!("{tag}  {} ({})  {}", e.experiment, e.mode, e.path.display());
        for c in &e.failed_checks {
            println!("      failed: {c}");
        }
    }
    let passed = entries.iter().filter(|e| e.passed).count();
    println!("{passed}/{} pass", entries.len());
}
