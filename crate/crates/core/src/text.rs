//! Flat structured text: `[section]` headers followed by `key = value` lines.
//!
//! Used for experiment configs, bound reports, fitted Hölder parameters and
//! persisted PCA models. `#` and `;` start comment lines. Keys are unique per
//! section; values are raw strings parsed on access.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Shortest decimal that round-trips to the same `f64`, using exponent
/// notation outside `[1e-4, 1e15)`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StructuredText {
    sections: BTreeMap<String, BTreeMap<String, String>>,
    order: Vec<(String, Vec<String>)>,
}

impl StructuredText {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::new();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::Config(format!("line {}: unterminated section header", n + 1))
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", n + 1)));
            }
            if doc.get(&section, key).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}` in [{section}]",
                    n + 1
                )));
            }
            doc.set(&section, key, value.trim());
        }
        Ok(doc)
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        let entries = self.sections.entry(section.to_string()).or_default();
        if entries.insert(key.to_string(), value.into()).is_none() {
            match self.order.iter_mut().find(|(s, _)| s == section) {
                Some((_, keys)) => keys.push(key.to_string()),
                None => self
                    .order
                    .push((section.to_string(), vec![key.to_string()])),
            }
        }
    }

    pub fn set_float(&mut self, section: &str, key: &str, value: f64) {
        self.set(section, key, format_float(value));
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn keys(&self, section: &str) -> Vec<&str> {
        self.sections
            .get(section)
            .map(|m| m.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn parse_opt<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("[{section}] {key} = {v:?} is malformed"))),
        }
    }

    pub fn parse_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        Ok(self.parse_opt(section, key)?.unwrap_or(default))
    }

    pub fn parse_required<T: FromStr>(&self, section: &str, key: &str) -> Result<T> {
        self.parse_opt(section, key)?
            .ok_or_else(|| Error::Config(format!("missing [{section}] {key}")))
    }

    /// Comma-separated list of floats.
    pub fn float_list(&self, section: &str, key: &str) -> Result<Vec<f64>> {
        let v = self
            .get(section, key)
            .ok_or_else(|| Error::Config(format!("missing [{section}] {key}")))?;
        parse_list(v).map_err(|_| Error::Config(format!("[{section}] {key} is not a float list")))
    }

    /// Renders sections and keys in insertion order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, (section, keys)) in self.order.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            if !section.is_empty() {
                let _ = writeln!(out, "[{section}]");
            }
            for key in keys {
                let _ = writeln!(out, "{key} = {}", self.sections[section][key]);
            }
        }
        out
    }
}

pub fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, T::Err> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let text = "# comment\n[a]\nx = 1.5\nname = hello world\n\n[b]\nlist = 1, 2,3\n";
        let doc = StructuredText::parse(text).unwrap();
        assert_eq!(doc.parse_required::<f64>("a", "x").unwrap(), 1.5);
        assert_eq!(doc.get("a", "name"), Some("hello world"));
        assert_eq!(doc.float_list("b", "list").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(doc.parse_required::<f64>("a", "name").is_err());
        assert!(doc.parse_required::<f64>("a", "missing").is_err());
        let again = StructuredText::parse(&doc.render()).unwrap();
        assert_eq!(again.get("b", "list"), Some("1, 2,3"));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(StructuredText::parse("[a\nx=1").is_err());
        assert!(StructuredText::parse("[a]\njunk").is_err());
        assert!(StructuredText::parse("[a]\nx=1\nx=2").is_err());
        assert!(StructuredText::parse("[a]\n = 2").is_err());
    }

    #[test]
    fn floats_round_trip() {
        for x in [
            0.0,
            1.0,
            -0.1,
            1e-300,
            123456.789,
            1e20,
            0.3430,
            f64::MIN_POSITIVE,
            5e-324,
        ] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(0.25), "0.25");
        assert_eq!(format_float(1e-7), "1e-7");
    }
}
