//! CSV tables and the JSON summary.
//!
//! Summary schema (`schema_version` 1):
//! `{schema, schema_version, csv_schema_version, command, seed, config, results, flags}`.
//! Nothing machine- or time-dependent is written, so equal configs give
//! byte-identical files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let io = |e: csv::Error| CliError::Runtime(format!("writing {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        for r in rows {
            w.serialize(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn summary(
        &self,
        command: &str,
        seed: u64,
        config: &Value,
        results: Value,
        flags: &[String],
    ) -> Result<PathBuf, CliError> {
        let path = self.path(&format!("{command}.json"));
        let doc = json!({
            "schema": "ltmax-summary",
            "schema_version": SUMMARY_SCHEMA_VERSION,
            "csv_schema_version": CSV_SCHEMA_VERSION,
            "command": command,
            "seed": seed,
            "config": config,
            "results": results,
            "flags": flags,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}
