//! Flat key-value configuration files and flag/config resolution.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored. Keys use the same names as the long command-line
//! flags. Flags always win over config-file values.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use romas::error::{Error, Result};

#[derive(Debug, Default)]
pub struct ConfigFile {
    pub path: Option<PathBuf>,
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut values = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    column: 1,
                    message: "expected 'key = value'".into(),
                });
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self {
            path: Some(path.to_path_buf()),
            values,
        })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Flag value if present, else the config-file value parsed with `parse`.
    pub fn resolve<V, F>(&self, flag: Option<V>, key: &str, parse: F) -> Result<Option<V>>
    where
        F: FnOnce(&str) -> Result<V>,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(text) => parse(text).map(Some),
            None => Ok(None),
        }
    }
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("'{}' is not a number", s.trim())))
        })
        .collect()
}

/// Sizes accept either a comma list (`20,40,60`) or `start:end:step`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid("range syntax is start:end:step"));
        }
        let bad = |s: &str| Error::invalid(format!("'{s}' is not a positive integer"));
        let start: usize = parts[0].trim().parse().map_err(|_| bad(parts[0]))?;
        let end: usize = parts[1].trim().parse().map_err(|_| bad(parts[1]))?;
        let step: usize = parts[2].trim().parse().map_err(|_| bad(parts[2]))?;
        if step == 0 || start == 0 || end < start {
            return Err(Error::invalid("range requires start >= 1, end >= start, step >= 1"));
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("'{}' is not a size", s.trim())))
            })
            .collect()
    }
}

pub fn parse_usize(text: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("'{text}' is not an integer")))
}

pub fn parse_f64(text: &str) -> Result<f64> {
    text.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("'{text}' is not a number")))
}

pub fn parse_bool(text: &str) -> Result<bool> {
    match text.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::invalid(format!("'{other}' is not a boolean"))),
    }
}
