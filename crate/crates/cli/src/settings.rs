use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::parser::ValueSource;
use clap::ArgMatches;

/// Every key a run config file may set. Keys a command does not use are ignored.
pub const KNOWN_KEYS: &[&str] = &[
    "input",
    "out",
    "tensor",
    "vocab",
    "model",
    "window",
    "max_vocab",
    "drop_top",
    "min_count",
    "binary",
    "dim",
    "learning_rate",
    "epochs",
    "seed",
    "x_max",
    "alpha",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
    "batch_size",
    "covariate_init",
    "init_scale",
    "glove",
    "threads",
    "deterministic",
];

/// Parses a flat `key = value` file. `#` starts a comment line.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{} line {}: expected 'key = value'", path.display(), idx + 1))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            bail!("{} line {}: unknown config key '{key}'", path.display(), idx + 1);
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            bail!("{} line {}: key '{key}' set twice", path.display(), idx + 1);
        }
    }
    Ok(map)
}

/// Resolves a value with flag > config file > built-in default precedence.
pub struct Settings<'a> {
    file: &'a BTreeMap<String, String>,
    matches: &'a ArgMatches,
}

impl<'a> Settings<'a> {
    pub fn new(file: &'a BTreeMap<String, String>, matches: &'a ArgMatches) -> Self {
        Self { file, matches }
    }

    fn explicit(&self, id: &str) -> bool {
        self.matches.value_source(id) == Some(ValueSource::CommandLine)
    }

    fn parse<T: FromStr>(&self, id: &str) -> Result<Option<T>> {
        match self.file.get(id) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| anyhow!("config key '{id}': invalid value '{raw}'")),
            None => Ok(None),
        }
    }

    pub fn get<T>(&self, id: &str) -> Result<T>
    where
        T: FromStr + Clone + Send + Sync + 'static,
    {
        self.opt(id)?.ok_or_else(|| anyhow!("missing required setting '--{}'", id.replace('_', "-")))
    }

    pub fn opt<T>(&self, id: &str) -> Result<Option<T>>
    where
        T: FromStr + Clone + Send + Sync + 'static,
    {
        if !self.explicit(id) {
            if let Some(v) = self.parse(id)? {
                return Ok(Some(v));
            }
        }
        Ok(self.matches.get_one::<T>(id).cloned())
    }

    pub fn flag(&self, id: &str) -> Result<bool> {
        if self.matches.get_flag(id) {
            return Ok(true);
        }
        Ok(self.parse::<bool>(id)?.unwrap_or(false))
    }
}
