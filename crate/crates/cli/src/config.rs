//! Flat `key = value` config files for the Monte Carlo subcommands.
//! Blank lines and `#` comments are ignored; lists are comma separated.

use std::collections::BTreeMap;
use std::path::Path;

pub struct FlatConfig {
    entries: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            entries.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), String> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(format!("unknown config key {k:?}")),
            None => Ok(()),
        }
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        self.entries
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| format!("bad value {v:?} for {key}")))
            .transpose()
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, String> {
        self.entries.get(key).map(|v| parse_list(v)).transpose()
    }
}

pub fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad number {s:?} in list {v:?}")))
        .collect()
}
