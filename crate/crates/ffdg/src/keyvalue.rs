//! Flat `key = value` text with `#` comments.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses into `key → (line, value)`; duplicate keys are an error.
pub fn parse(path: &Path, text: &str) -> Result<BTreeMap<String, (u64, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(path, line, format!("expected `key = value`, found `{content}`")))?;
        let key = k.trim().to_string();
        if out.insert(key.clone(), (line, v.trim().to_string())).is_some() {
            return Err(Error::parse(path, line, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}
