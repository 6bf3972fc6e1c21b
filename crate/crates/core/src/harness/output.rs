use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::{RunSummary, SCHEMA_VERSION};
use crate::error::{BanditError, Result};

/// Provenance record written next to every output set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub library_version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub seeds: Vec<u64>,
    pub files: Vec<String>,
    /// Seconds since the Unix epoch; the only nondeterministic field.
    pub created_unix: u64,
}

impl Manifest {
    pub fn new(command: &str, config_hash: Option<String>, seeds: Vec<u64>, files: Vec<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash,
            seeds,
            files,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> BanditError {
    BanditError::state(format!("cannot write {}: {e}", path.display()))
}

/// Writes `files` (name, contents) and a manifest into `dir`. Without a
/// config, `seeds` are recorded as given.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    cfg: Option<&ExperimentConfig>,
    seeds: Vec<u64>,
    files: &[(&str, String)],
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| io_err(&p, e))?;
    }
    let names = files.iter().map(|(n, _)| n.to_string()).collect();
    let manifest = match cfg {
        Some(c) => Manifest::new(command, Some(c.hash()), c.seeds.seeds(), names),
        None => Manifest::new(command, None, seeds, names),
    };
    let p = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| io_err(&p, e))?;
    fs::write(&p, body + "\n").map_err(|e| io_err(&p, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

/// Trace, summary and manifest of a finished run.
pub fn write_run(dir: &Path, cfg: &ExperimentConfig, summary: &RunSummary) -> Result<()> {
    write_outputs(
        dir,
        "run",
        Some(cfg),
        Vec::new(),
        &[
            ("trace.csv", summary.trace_csv()),
            ("summary.json", to_json(summary)),
            ("config.toml", cfg.to_toml()),
        ],
    )
}
