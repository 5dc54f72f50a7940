//! Flat `key = value` configuration files with `[section]` headers.
//!
//! Sections are subcommand names plus `[global]`; every key is validated
//! against the schema below, so typos fail loudly instead of being ignored.
//! Command-line flags override file values, which override defaults.

use std::collections::BTreeMap;
use std::path::Path;

const SECTIONS: &[(&str, &[&str])] = &[
    ("global", &["seed", "out", "threads"]),
    (
        "converge",
        &["fixture", "grid", "steps", "trials", "cells", "seed", "out", "threads"],
    ),
    (
        "ball",
        &[
            "mode", "d", "l", "z0", "radius", "steps", "trials", "max-k", "ks-threshold", "seed",
            "out", "threads",
        ],
    ),
    ("constants", &["d", "l", "max-k", "mc-samples", "seed", "out"]),
    ("verify", &["quick", "seed", "out"]),
];

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    /// `section.key` -> value
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig, String> {
        let mut entries = BTreeMap::new();
        let mut section = "global".to_string();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(format!("line {}: unknown section [{name}]", lineno + 1));
                }
                section = name.to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let key = key.trim();
            let value = value.trim();
            let allowed = SECTIONS
                .iter()
                .find(|(s, _)| *s == section)
                .map(|(_, keys)| keys.contains(&key))
                .unwrap_or(false);
            if !allowed {
                return Err(format!(
                    "line {}: unknown key `{key}` in section [{section}]",
                    lineno + 1
                ));
            }
            entries.insert(format!("{section}.{key}"), value.to_string());
        }
        Ok(FileConfig { entries })
    }

    pub fn load(path: &Path) -> Result<FileConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    /// Look up `key` in `[section]`, falling back to `[global]`.
    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .get(&format!("{section}.{key}"))
            .or_else(|| self.entries.get(&format!("global.{key}")))
            .map(String::as_str)
    }

    pub fn get_parsed<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
    ) -> Result<Option<T>, String> {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key {section}.{key}: cannot parse `{raw}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_rejects_unknown_keys() {
        let cfg = FileConfig::parse(
            "seed = 7\n[converge]\nfixture = interval-d1\ntrials = 100 # comment\n",
        )
        .unwrap();
        assert_eq!(cfg.get("converge", "fixture"), Some("interval-d1"));
        assert_eq!(cfg.get("converge", "seed"), Some("7")); // global fallback
        assert!(FileConfig::parse("nonsense = 1\n").is_err());
        assert!(FileConfig::parse("[nowhere]\n").is_err());
        assert!(FileConfig::parse("[ball]\nbad-key = 2\n").is_err());
    }
}
