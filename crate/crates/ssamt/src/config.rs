//! `key = value` config files. Keys are flag names without the leading
//! dashes (`window`, `group-column`, `group_column`); `#` starts a comment
//! line. Command-line flags take precedence over the file.

use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

pub fn parse_config(text: &str) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected key=value, found {line:?}", i + 1);
        };
        let key = normalize_key(key);
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        let value = value.trim().trim_matches('"').to_string();
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            bail!("line {}: {key:?} already set on line {}", i + 1, prev.line);
        }
        entries.push(Entry { key, value, line: i + 1 });
    }
    Ok(entries)
}

pub fn read_config(path: &Path) -> Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("config {}", path.display()))
}

pub fn parse_bool(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let e = parse_config("# run\nwindow = 50\n\nGroup_Column=sex\nprocedures = bonferroni,holm\n").unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0].key, "window");
        assert_eq!(e[1].key, "group-column");
        assert_eq!(e[1].value, "sex");
        assert_eq!(e[2].value, "bonferroni,holm");
        assert_eq!(e[2].line, 5);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config("window 50").is_err());
        assert!(parse_config("=3").is_err());
        assert!(parse_config("alpha=0.05\nalpha=0.01").is_err());
    }

    #[test]
    fn booleans() {
        assert_eq!(parse_bool("Yes"), Some(true));
        assert_eq!(parse_bool("off"), Some(false));
        assert_eq!(parse_bool("maybe"), None);
    }
}
