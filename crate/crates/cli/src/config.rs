//! `key = value` configuration files.
//!
//! Keys use the long flag names without dashes prefix (`max-iter = 500`).
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::usage("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(
                    "config",
                    format!("line {}: expected key=value", lineno + 1),
                ));
            };
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The flag value if given, else the parsed file value, else `None`.
    pub fn pick<T: FromStr>(
        &self,
        flag: Option<T>,
        key: &'static str,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(text) => text.parse().map(Some).map_err(|_| {
                CliError::usage(key, format!("cannot parse {text:?} from config file"))
            }),
        }
    }

    /// Boolean switches: set by the flag or by `key = true` in the file.
    pub fn switch(&self, flag: bool, key: &'static str) -> Result<bool, CliError> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }

    pub fn pick_string(&self, flag: Option<String>, key: &'static str) -> Option<String> {
        flag.or_else(|| self.raw(key).map(str::to_string))
    }
}
