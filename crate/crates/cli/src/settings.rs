//! Flat `key = value` config files and flag/config/default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Keys accepted in a config file; the same names as the long flags.
pub const KNOWN_KEYS: &[&str] = &[
    "preset",
    "energy",
    "a",
    "d",
    "r",
    "phi",
    "overlap",
    "n",
    "targets",
    "t-max",
    "steps",
    "format",
    "seed",
    "ode-tol",
    "oracle",
    "points",
    "phi-min",
    "phi-max",
    "family",
    "n-list",
    "trials",
    "tolerance",
    "only",
];

pub const SEED_ENV: &str = "HSEARCH_SEED";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|msg| CliError::Usage(format!("{}: {msg}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim().trim_matches('"').to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key '{key}'", lineno + 1));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(format!("line {}: duplicate key '{key}'", lineno + 1));
            }
        }
        Ok(ConfigFile { values })
    }
}

/// Explicit flag, then config file, then caller default.
pub struct Resolver {
    config: ConfigFile,
}

impl Resolver {
    pub fn new(config_path: Option<&Path>) -> Result<Self, CliError> {
        let config = match config_path {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Ok(Resolver { config })
    }

    pub fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.config_value(key)
    }

    pub fn config_value<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.config.values.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key '{key}': invalid value '{v}': {e}"))),
            None => Ok(None),
        }
    }

    /// Boolean switches: a set flag wins, otherwise the config value.
    pub fn switch(&self, key: &str, flag: bool) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        Ok(self.config_value(key)?.unwrap_or(false))
    }

    /// Flag, config, `HSEARCH_SEED`, then `default`.
    pub fn seed(&self, flag: Option<u64>, default: u64) -> Result<u64, CliError> {
        if let Some(s) = self.get("seed", flag)? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|e| CliError::Usage(format!("{SEED_ENV}: invalid seed '{v}': {e}"))),
            Err(_) => Ok(default),
        }
    }
}

/// Comma-separated list, e.g. `4,16,64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List<T>(pub Vec<T>);

impl<T> FromStr for List<T>
where
    T: FromStr,
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse().map_err(|e| format!("'{p}': {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}
