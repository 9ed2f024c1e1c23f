//! Key-value configuration files mirroring the command-line flags.
//!
//! ```text
//! # comment
//! model = multinomial
//! probs = 0.3
//! alpha = -1,-3
//! ```
//!
//! Keys are flag names without the leading dashes. Boolean flags take
//! `true` or `false`.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_config(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut entries: Vec<ConfigEntry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-') {
            return Err(Error::Parse { line, message: format!("invalid key `{key}`") });
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(Error::Parse {
                line,
                message: format!("`{key}` already set on line {}", prev.line),
            });
        }
        entries.push(ConfigEntry { line, key: key.to_string(), value: value.trim().to_string() });
    }
    Ok(entries)
}

/// Expands entries into flag arguments for a subcommand, given which of its
/// long flags exist and which are boolean switches.
pub fn config_to_args(
    entries: &[ConfigEntry],
    is_flag: impl Fn(&str) -> Option<bool>,
) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for e in entries {
        if e.key == "config" {
            return Err(Error::Parse { line: e.line, message: "config files cannot include other config files".into() });
        }
        match is_flag(&e.key) {
            None => return Err(Error::Parse { line: e.line, message: format!("unknown key `{}`", e.key) }),
            Some(true) => match e.value.as_str() {
                "true" => args.push(format!("--{}", e.key)),
                "false" => {}
                other => {
                    return Err(Error::Parse {
                        line: e.line,
                        message: format!("`{}` takes true or false, got `{other}`", e.key),
                    })
                }
            },
            Some(false) => {
                args.push(format!("--{}", e.key));
                args.push(e.value.clone());
            }
        }
    }
    Ok(args)
}
