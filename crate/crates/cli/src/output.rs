//! CSV tables and the `run.json` sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::{CliError, CSV_SCHEMA_VERSION};

pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let err = |e: &dyn std::fmt::Display| CliError::Output(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(|e| err(&e))?;
    for row in rows {
        w.serialize(row).map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))?;
    Ok(path)
}

#[derive(Serialize)]
struct Sidecar<'a, S: Serialize> {
    command: &'a str,
    csv_schema_version: u32,
    version: &'a str,
    git_hash: &'a str,
    threads: usize,
    files: Vec<String>,
    config: &'a ExperimentConfig,
    summary: S,
}

pub fn write_sidecar<S: Serialize>(
    dir: &Path,
    command: &str,
    config: &ExperimentConfig,
    files: &[PathBuf],
    summary: S,
) -> Result<PathBuf, CliError> {
    let sidecar = Sidecar {
        command,
        csv_schema_version: CSV_SCHEMA_VERSION,
        version: env!("CARGO_PKG_VERSION"),
        git_hash: env!("UPDOWN_GIT_HASH"),
        threads: rayon::current_num_threads(),
        files: files.iter().filter_map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned())).collect(),
        config,
        summary,
    };
    let path = dir.join("run.json");
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::Output(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    Ok(path)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))
}
