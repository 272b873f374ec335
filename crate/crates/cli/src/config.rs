//! Command-line flags layered over an optional TOML file.
//!
//! The file holds the global keys (`out`, `format`, `seed`) at top level
//! and one table per subcommand whose keys are the long flag names, e.g.
//!
//! ```toml
//! out = "results"
//! [simulate-1d]
//! tau = 0.25
//! t-end = 40.0
//! ```
//!
//! Flags given on the command line win over the file.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

pub fn config_error<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, clap::Args)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GlobalArgs {
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Table format.
    #[arg(long, alias = "emit", value_enum, global = true)]
    pub format: Option<Format>,
    /// Seed for the randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Globals {
    pub out: PathBuf,
    pub format: Format,
    pub seed: u64,
}

pub const DEFAULT_OUT: &str = "kinfront-out";
pub const DEFAULT_SEED: u64 = 20_240_611;

/// Parsed file contents: the top-level keys and the subcommand tables.
#[derive(Debug, Default)]
pub struct FileConfig {
    root: serde_json::Map<String, Value>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("config {}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let doc: toml::Table = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        match serde_json::to_value(doc).map_err(|e| ConfigError(e.to_string()))? {
            Value::Object(root) => Ok(FileConfig { root }),
            _ => config_error("config root must be a table"),
        }
    }

    /// Rejects tables for subcommands that do not exist.
    pub fn check_sections(&self, known: &[&str]) -> Result<(), ConfigError> {
        for (k, v) in &self.root {
            if v.is_object() && !known.contains(&k.as_str()) {
                return config_error(format!("unknown config section [{k}]"));
            }
        }
        Ok(())
    }

    fn globals(&self) -> Value {
        Value::Object(self.root.iter().filter(|(_, v)| !v.is_object()).map(|(k, v)| (k.clone(), v.clone())).collect())
    }

    fn section(&self, name: &str) -> Value {
        self.root.get(name).cloned().unwrap_or_else(|| Value::Object(Default::default()))
    }

    pub fn resolve_globals(&self, cli: &GlobalArgs) -> Result<Globals, ConfigError> {
        let g: GlobalArgs = overlay(self.globals(), cli)?;
        Ok(Globals {
            out: g.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            format: g.format.unwrap_or(Format::Csv),
            seed: g.seed.unwrap_or(DEFAULT_SEED),
        })
    }

    pub fn resolve<T: Serialize + DeserializeOwned>(&self, section: &str, cli: &T) -> Result<T, ConfigError> {
        overlay(self.section(section), cli).map_err(|e| ConfigError(format!("[{section}]: {}", e.0)))
    }
}

/// Writes every non-null flag of `cli` over `base` and reads the result back.
fn overlay<T: Serialize + DeserializeOwned>(base: Value, cli: &T) -> Result<T, ConfigError> {
    let Value::Object(mut merged) = base else {
        return config_error("config section must be a table");
    };
    if let Value::Object(flags) = serde_json::to_value(cli).map_err(|e| ConfigError(e.to_string()))? {
        for (k, v) in flags {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| ConfigError(e.to_string()))
}
