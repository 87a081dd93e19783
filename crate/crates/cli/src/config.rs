//! Key-value config file: one `key=value` pair per line, `#` comments.
//! Flags given on the command line take precedence over file entries.

use std::collections::BTreeMap;

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    /// Flag value if set, else config-file value, else the default.
    pub fn resolve<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            Some(raw) => raw.parse::<T>().map_err(|_| {
                CliError::Config(format!("config key '{key}' has unparsable value '{raw}'"))
            }),
            None => Ok(default),
        }
    }

    /// Like `resolve` but without a default.
    pub fn resolve_opt<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Config(format!("config key '{key}' has unparsable value '{raw}'"))
            }),
            None => Ok(None),
        }
    }
}

pub fn load(path: Option<&str>) -> Result<Config, CliError> {
    let mut cfg = Config::default();
    let Some(path) = path else {
        return Ok(cfg);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config '{path}': {e}")))?;
    for (lineno, line) in text.lines().enumerate() {
        let stripped = line.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| {
            CliError::Config(format!("config line {} is not key=value", lineno + 1))
        })?;
        cfg.entries
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(cfg)
}
