//! Plain-text `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored. List
//! values are comma separated.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_str(text: &str, origin: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                path: origin.to_string(),
                line,
                reason: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config {
                path: origin.to_string(),
                line,
                reason: "empty key".into(),
            });
        }
        if out.iter().any(|e| e.key == key) {
            return Err(Error::Config {
                path: origin.to_string(),
                line,
                reason: format!("duplicate key `{key}`"),
            });
        }
        out.push(Entry {
            line,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

pub fn parse_file(path: &Path) -> Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&text, &path.display().to_string())
}

pub(crate) fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(key, format!("cannot parse `{value}`")))
}

pub(crate) fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(Error::invalid(key, "list is empty"));
    }
    items.into_iter().map(|s| parse_value(key, s)).collect()
}
