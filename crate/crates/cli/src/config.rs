//! Flat `key = value` configuration files with `[section]` headers.
//!
//! Blank lines and lines starting with `#` are ignored. Keys that appear
//! before the first header belong to `[model]`. Lists are comma separated.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Sections and the keys each one accepts.
const SCHEMA: &[(&str, &[&str])] = &[
    ("model", &["p", "n", "r", "k", "beta", "theta", "kind", "seed"]),
    ("ct", &["tau", "rho", "k", "k0", "theta"]),
    ("dt", &["k"]),
    ("data-driven", &["nu_prime", "edge_trials", "edge_safety"]),
    ("run", &["methods"]),
    (
        "sweep",
        &["method", "ps", "ratios", "beta", "theta", "tau", "rho", "k0_factor", "nu_prime", "trials", "seed"],
    ),
    ("wavelet", &["p", "n", "beta", "nu_prime", "seed", "dt_size", "breaks", "levels"]),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    section: &'static str,
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    entries: Vec<Entry>,
}

fn section_name(name: &str) -> Option<&'static str> {
    SCHEMA.iter().map(|(s, _)| *s).find(|s| *s == name)
}

fn known_key(section: &str, key: &str) -> bool {
    SCHEMA.iter().any(|(s, keys)| *s == section && keys.contains(&key))
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut section = "model";
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line, format!("malformed section header `{content}`")))?
                    .trim();
                section = section_name(name).ok_or_else(|| ConfigError::at(line, format!("unknown section [{name}]")))?;
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::at(line, "empty key"));
            }
            if !known_key(section, key) {
                return Err(ConfigError::at(line, format!("unknown key `{key}` in [{section}]")));
            }
            if let Some(prev) = entries.iter().find(|e| e.section == section && e.key == key) {
                return Err(ConfigError::at(
                    line,
                    format!("duplicate key `{key}` in [{section}] (first set at line {})", prev.line),
                ));
            }
            entries.push(Entry {
                section,
                key: key.to_string(),
                value: value.to_string(),
                line,
            });
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Config::parse(&text)?)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        debug_assert!(known_key(section, key), "{section}.{key} is not in the schema");
        self.entries.iter().find(|e| e.section == section && e.key == key)
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.entry(section, key).is_some()
    }

    /// Overrides (or sets) a value, as `--seed` does.
    pub fn set(&mut self, section: &'static str, key: &str, value: String) {
        match self.entries.iter_mut().find(|e| e.section == section && e.key == key) {
            Some(e) => e.value = value,
            None => self.entries.push(Entry {
                section,
                key: key.to_string(),
                value,
                line: 0,
            }),
        }
    }

    fn error(entry: &Entry, message: String) -> ConfigError {
        ConfigError {
            line: (entry.line > 0).then_some(entry.line),
            message: format!("`{}` in [{}] {message}", entry.key, entry.section),
        }
    }

    /// An error about `key`, pointing at its line when the key is present.
    pub fn invalid(&self, section: &str, key: &str, message: impl fmt::Display) -> ConfigError {
        match self.entry(section, key) {
            Some(e) => Config::error(e, message.to_string()),
            None => ConfigError {
                line: None,
                message: format!("`{key}` in [{section}] {message}"),
            },
        }
    }

    pub fn str(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    /// A value parsed as `T`; finite-number checks are left to the typed
    /// wrappers.
    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        let Some(e) = self.entry(section, key) else {
            return Ok(None);
        };
        e.value
            .parse()
            .map(Some)
            .map_err(|_| Config::error(e, format!("has invalid value `{}`", e.value)))
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = self.get::<f64>(section, key)?;
        match v {
            Some(x) if !x.is_finite() => Err(Config::error(self.entry(section, key).unwrap(), "must be finite".into())),
            _ => Ok(v),
        }
    }

    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(e) = self.entry(section, key) else {
            return Ok(None);
        };
        let items: Result<Vec<T>, _> = e.value.split(',').map(|s| s.trim().parse::<T>()).collect();
        match items {
            Ok(v) if !v.is_empty() => Ok(Some(v)),
            _ => Err(Config::error(e, format!("has invalid list `{}`", e.value))),
        }
    }

    pub fn f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let v = self.list::<f64>(section, key)?;
        if let Some(xs) = &v {
            if xs.iter().any(|x| !x.is_finite()) {
                return Err(Config::error(self.entry(section, key).unwrap(), "must hold finite numbers".into()));
            }
        }
        Ok(v)
    }

    pub fn require<T>(value: Option<T>, section: &str, key: &str) -> Result<T, ConfigError> {
        value.ok_or_else(|| ConfigError {
            line: None,
            message: format!("missing required key `{key}` in [{section}]"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_lists() {
        let cfg = Config::parse("p = 50\n# comment\n\n[sweep]\nps = 10, 20\nratios=0.5\n").unwrap();
        assert_eq!(cfg.get::<usize>("model", "p").unwrap(), Some(50));
        assert_eq!(cfg.list::<usize>("sweep", "ps").unwrap(), Some(vec![10, 20]));
        assert_eq!(cfg.f64_list("sweep", "ratios").unwrap(), Some(vec![0.5]));
        assert_eq!(cfg.f64("sweep", "beta").unwrap(), None);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = Config::parse("[model]\np = 5\nbetaa = 2\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("betaa"));
        assert!(err.to_string().starts_with("line 3:"));
    }

    #[test]
    fn rejects_bad_structure() {
        assert_eq!(Config::parse("[nope]\n").unwrap_err().line, Some(1));
        assert_eq!(Config::parse("[model\n").unwrap_err().line, Some(1));
        assert_eq!(Config::parse("p 5\n").unwrap_err().line, Some(1));
        assert_eq!(Config::parse("p = 1\np = 2\n").unwrap_err().line, Some(2));
    }

    #[test]
    fn numbers_must_be_finite() {
        let cfg = Config::parse("beta = inf\ntheta = x\n").unwrap();
        assert_eq!(cfg.f64("model", "beta").unwrap_err().line, Some(1));
        assert_eq!(cfg.f64("model", "theta").unwrap_err().line, Some(2));
    }

    #[test]
    fn overrides_replace_values() {
        let mut cfg = Config::parse("seed = 1\n").unwrap();
        cfg.set("model", "seed", "9".into());
        assert_eq!(cfg.get::<u64>("model", "seed").unwrap(), Some(9));
    }
}
