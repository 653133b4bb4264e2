//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored; lists are comma
//! separated. Unknown keys are rejected so typos surface as errors.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel::KernelFamily;
use crate::multiplier::Multiplier;

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
    used: std::cell::RefCell<BTreeSet<String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { entries, used: Default::default() })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("cannot parse `{key}` = `{v}`"))))
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        item.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Config(format!("cannot parse `{key}` item `{}`", item.trim())))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn require_list(&self, key: &str) -> Result<Vec<f64>> {
        self.get_list(key)?.ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    /// Fails on any key no accessor asked for.
    pub fn reject_unused(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.entries.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(Error::Config(format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }

    /// Reads `multiplier`, `multiplier_a` (value or amplitude, default 1) and
    /// `multiplier_b` (sine frequency, default 1).
    pub fn multiplier(&self) -> Result<Multiplier> {
        let kind: String = self.require("multiplier")?;
        let a = self.get_or("multiplier_a", 1.0)?;
        match kind.as_str() {
            "constant" => Ok(Multiplier::constant(a)),
            "sine" => Ok(Multiplier::sine(a, self.get_or("multiplier_b", 1.0)?)),
            "rational" => Ok(Multiplier::rational(a)),
            other => Err(Error::Config(format!("unknown multiplier `{other}`"))),
        }
    }

    pub fn kernel_family(&self, default: KernelFamily) -> Result<KernelFamily> {
        match self.raw("kernel") {
            Some(name) => name.parse(),
            None => Ok(default),
        }
    }
}
