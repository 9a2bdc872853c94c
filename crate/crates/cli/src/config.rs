//! Plain-text `key = value` run files whose keys are the long flag names.

use std::collections::BTreeSet;

use crate::error::CliError;

/// Parsed entries in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| CliError::Config(format!("line {line_no}: {msg}"));
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!("expected key = value, got {line:?}")));
        };
        let key = key.trim();
        let mut value = value.trim();
        if key.is_empty()
            || !key
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
        {
            return Err(err(format!("bad key {key:?}")));
        }
        if key == "config" {
            return Err(err("config files cannot include other config files".into()));
        }
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = &value[1..value.len() - 1];
        }
        if value.is_empty() {
            return Err(err(format!("empty value for {key}")));
        }
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key {key}")));
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

/// Entries rendered as `--key value` arguments.
pub fn as_args(entries: &[(String, String)]) -> Vec<String> {
    entries
        .iter()
        .flat_map(|(k, v)| [format!("--{k}"), v.clone()])
        .collect()
}
