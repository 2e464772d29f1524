//! Flat `key = value` configuration. Keys are the long flag names without the
//! leading dashes; a flag given on the command line wins over the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Blank lines and lines starting with `#` are skipped; a repeated key is an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            let key = k.trim().trim_start_matches("--").to_string();
            if key.is_empty() {
                bail!("line {}: empty key", i + 1);
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                bail!("line {}: duplicate key {key}", i + 1);
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The flag value if given, else the config value if present.
    pub fn opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| anyhow!("config key {key} = {v:?}: {e}")),
        }
    }

    pub fn get<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.opt(flag, key)?.ok_or_else(|| anyhow!("missing --{key} (flag or config key)"))
    }

    /// Boolean switches: set by the flag, or by `true`/`false` in the file.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool> {
        Ok(flag || self.opt::<bool>(None, key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let cfg = Config::parse("# run\nn = 8\nkappa=16\n\n--seed = 3\n").unwrap();
        assert_eq!(cfg.get::<usize>(None, "n", 1).unwrap(), 8);
        assert_eq!(cfg.get(Some(4usize), "n", 1).unwrap(), 4);
        assert_eq!(cfg.get::<u64>(None, "seed", 0).unwrap(), 3);
        assert_eq!(cfg.get::<usize>(None, "m", 64).unwrap(), 64);
    }

    #[test]
    fn malformed_lines_and_duplicates_rejected() {
        assert!(Config::parse("n 8").is_err());
        assert!(Config::parse("n = 1\nn = 2").is_err());
        let cfg = Config::parse("n = eight").unwrap();
        assert!(cfg.get::<usize>(None, "n", 1).is_err());
    }

    #[test]
    fn switch_reads_booleans() {
        let cfg = Config::parse("tcp = true").unwrap();
        assert!(cfg.switch(false, "tcp").unwrap());
        assert!(!Config::default().switch(false, "tcp").unwrap());
    }

    proptest::proptest! {
        #[test]
        fn written_values_read_back(
            entries in proptest::collection::btree_map("[a-z][a-z-]{0,8}", "[a-z0-9.:]{1,8}", 0..8),
        ) {
            let text: String = entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
            let cfg = Config::parse(&text).unwrap();
            for (k, v) in &entries {
                proptest::prop_assert_eq!(cfg.raw(k), Some(v.as_str()));
            }
        }
    }
}
