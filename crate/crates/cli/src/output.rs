//! Files under the output directory, all written through a temporary file
//! and a rename so that readers never see a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;
use crate::table::{Table, ARTIFACT_VERSION};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Writes `table` in the chosen format and returns the file name.
pub fn write_table(dir: &Path, table: &Table, format: Format) -> std::io::Result<String> {
    let (name, bytes) = match format {
        Format::Csv => (table.file_name(), table.to_csv().map_err(std::io::Error::other)?.into_bytes()),
        Format::Json => (
            format!("{}.json", table.name),
            serde_json::to_vec_pretty(&table.to_json()).map_err(std::io::Error::other)?,
        ),
    };
    write_atomic(&dir.join(&name), &bytes)?;
    Ok(name)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    ChecksFailed,
    RuntimeError,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::RuntimeError => 1,
            RunStatus::ChecksFailed => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact: &'static str,
    pub artifact_version: &'static str,
    pub subcommand: String,
    pub config: Value,
    pub status: RunStatus,
    pub exit_code: i32,
    pub error: Option<String>,
    pub duration_seconds: f64,
    pub checks_passed: bool,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub results: Value,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Value) -> Self {
        RunManifest {
            artifact: "kinfront",
            artifact_version: ARTIFACT_VERSION,
            subcommand: subcommand.to_string(),
            config,
            status: RunStatus::Ok,
            exit_code: 0,
            error: None,
            duration_seconds: 0.0,
            checks_passed: true,
            checks: Vec::new(),
            warnings: Vec::new(),
            results: Value::Null,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self, elapsed: Duration, error: Option<String>) {
        self.duration_seconds = elapsed.as_secs_f64();
        self.checks_passed = self.checks.iter().all(|c| c.passed);
        self.status = match (&error, self.checks_passed) {
            (Some(_), _) => RunStatus::RuntimeError,
            (None, false) => RunStatus::ChecksFailed,
            (None, true) => RunStatus::Ok,
        };
        self.error = error;
        self.exit_code = self.status.exit_code();
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(self).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}
