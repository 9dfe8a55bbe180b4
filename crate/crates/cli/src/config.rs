//! `key = value` config files with `[section]` headers. Section names only
//! group keys; a key may appear in at most one place.

use std::collections::BTreeMap;
use std::path::Path;

use hpbp::{Error, Result};

pub const KEYS: &[&str] = &[
    "operator",
    "vector",
    "symbol",
    "alpha",
    "beta",
    "t",
    "suites",
    "seed",
    "trials",
    "dim",
    "rel_tol",
    "abs_tol",
    "max_panels",
    "out",
    "require_oracle",
    "route",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return Err(Error::Parse(format!("config line {}: bad section header", i + 1)));
                }
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Parse(format!("config line {}: unknown key '{key}'", i + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("config line {}: duplicate key '{key}'", i + 1)));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Parse(format!("config key '{key}': invalid value '{v}'")))
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(Error::Parse(format!("config key '{key}': expected a boolean, got '{v}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let c = ConfigFile::parse("# c\n[run]\noperator = a.csv\n\n[quadrature]\nrel-tol=1e-9\n").unwrap();
        assert_eq!(c.get("operator"), Some("a.csv"));
        assert_eq!(c.parsed::<f64>("rel_tol").unwrap(), Some(1e-9));
        assert_eq!(c.parsed::<u64>("seed").unwrap(), None);
    }

    #[test]
    fn rejects_garbage() {
        assert!(ConfigFile::parse("operator\n").is_err());
        assert!(ConfigFile::parse("colour = red\n").is_err());
        assert!(ConfigFile::parse("seed=1\n[x]\nseed=2\n").is_err());
        assert!(ConfigFile::parse("[bad\n").is_err());
        assert!(ConfigFile::parse("seed = x\n").unwrap().parsed::<u64>("seed").is_err());
    }
}
