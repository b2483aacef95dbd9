//! Flat key-value run configuration.
//!
//! The file format is one `key = value` pair per line, `#` comments, blank
//! lines ignored. Command-line flags always override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{CliError, ErrorKind};

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::new(ErrorKind::Io, format!("{}: {e}", path.display()))
        })?;
        let mut values = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::new(
                    ErrorKind::Format,
                    format!("{}:{}: expected key = value", path.display(), idx + 1),
                ));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(RunConfig { values })
    }

    /// Flag value if given, else the config entry under `key`.
    pub fn string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.values.get(key).cloned())
    }

    pub fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.values.get(key).map(PathBuf::from))
    }

    pub fn parsed<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::new(
                    ErrorKind::Format,
                    format!("config key {key}: cannot parse {raw:?}"),
                )
            }),
        }
    }

    pub fn flag(&self, flag: bool, key: &str) -> bool {
        flag || matches!(
            self.values.get(key).map(String::as_str),
            Some("1") | Some("true") | Some("yes")
        )
    }
}
