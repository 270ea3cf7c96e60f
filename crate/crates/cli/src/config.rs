//! Flat `key = value` configuration with `[section]` headers.
//!
//! The grammar is documented in `docs/config.md`. Every key and section a
//! scenario does not read is reported as an error, anchored at its line.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// One-based line number, when the problem has a location.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    pub fn global(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {}: {}", l, self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug)]
pub struct Section {
    /// Empty for keys above the first header.
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
    used: RefCell<BTreeSet<String>>,
}

#[derive(Debug)]
pub struct Config {
    sections: Vec<Section>,
    touched: RefCell<BTreeSet<String>>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}

impl Config {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut sections = vec![Section::new(String::new(), 0)];
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(ConfigError::at(line_no, "section header is missing its closing `]`"));
                };
                let name = name.trim();
                if !is_identifier(name) {
                    return Err(ConfigError::at(line_no, format!("invalid section name `{}`", name)));
                }
                if let Some(prev) = sections.iter().find(|s| s.name == name) {
                    return Err(ConfigError::at(
                        line_no,
                        format!("section [{}] already defined on line {}", name, prev.line),
                    ));
                }
                sections.push(Section::new(name.to_string(), line_no));
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::at(line_no, format!("expected `key = value` or `[section]`, found `{}`", line)));
            };
            let (key, value) = (key.trim(), value.trim());
            if !is_identifier(key) {
                return Err(ConfigError::at(line_no, format!("invalid key `{}`", key)));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line_no, format!("key `{}` has an empty value", key)));
            }
            let section = sections.last_mut().expect("root section");
            if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
                return Err(ConfigError::at(line_no, format!("key `{}` already set on line {}", key, prev.line)));
            }
            section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line: line_no });
        }
        Ok(Self { sections, touched: RefCell::new(BTreeSet::new()) })
    }

    /// Keys above the first section header.
    pub fn root(&self) -> &Section {
        self.touched.borrow_mut().insert(String::new());
        &self.sections[0]
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        let s = self.sections.iter().find(|s| s.name == name)?;
        self.touched.borrow_mut().insert(name.to_string());
        Some(s)
    }

    pub fn require_section(&self, name: &str) -> ConfigResult<&Section> {
        self.section(name).ok_or_else(|| ConfigError::global(format!("missing section [{}]", name)))
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.iter().any(|s| s.name == name)
    }

    /// Fails on the first section or key that was never read.
    pub fn finish(&self) -> ConfigResult<()> {
        let touched = self.touched.borrow();
        for s in &self.sections {
            if !s.name.is_empty() && !touched.contains(&s.name) {
                return Err(ConfigError::at(s.line, format!("unknown section [{}] for this scenario", s.name)));
            }
            let used = s.used.borrow();
            if let Some(e) = s.entries.iter().find(|e| !used.contains(&e.key)) {
                let place = if s.name.is_empty() { "at top level".to_string() } else { format!("in [{}]", s.name) };
                return Err(ConfigError::at(e.line, format!("unknown key `{}` {}", e.key, place)));
            }
        }
        Ok(())
    }
}

impl Section {
    fn new(name: String, line: usize) -> Self {
        Self { name, line, entries: Vec::new(), used: RefCell::new(BTreeSet::new()) }
    }

    fn label(&self) -> String {
        if self.name.is_empty() {
            "the top level".into()
        } else {
            format!("[{}]", self.name)
        }
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        let e = self.entries.iter().find(|e| e.key == key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(e)
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }

    fn missing(&self, key: &str) -> ConfigError {
        let msg = format!("{} is missing required key `{}`", self.label(), key);
        if self.line == 0 {
            ConfigError::global(msg)
        } else {
            ConfigError::at(self.line, msg)
        }
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entry(key).map(|e| e.value.as_str())
    }

    pub fn require_str(&self, key: &str) -> ConfigResult<&str> {
        self.get_str(key).ok_or_else(|| self.missing(key))
    }

    pub fn get_parsed<V: FromStr>(&self, key: &str, what: &str) -> ConfigResult<Option<(V, usize)>> {
        let Some(e) = self.entry(key) else { return Ok(None) };
        match e.value.parse::<V>() {
            Ok(v) => Ok(Some((v, e.line))),
            Err(_) => Err(ConfigError::at(e.line, format!("`{}` must be {}, found `{}`", key, what, e.value))),
        }
    }

    pub fn get_f64(&self, key: &str) -> ConfigResult<Option<f64>> {
        match self.get_parsed::<f64>(key, "a finite number")? {
            Some((v, line)) if !v.is_finite() => {
                Err(ConfigError::at(line, format!("`{}` must be a finite number, found {}", key, v)))
            }
            other => Ok(other.map(|(v, _)| v)),
        }
    }

    pub fn require_f64(&self, key: &str) -> ConfigResult<f64> {
        self.get_f64(key)?.ok_or_else(|| self.missing(key))
    }

    /// A number checked against `ok`; `rule` describes the accepted range.
    pub fn get_checked(&self, key: &str, rule: &str, ok: impl Fn(f64) -> bool) -> ConfigResult<Option<f64>> {
        let Some(v) = self.get_f64(key)? else { return Ok(None) };
        if !ok(v) {
            return Err(self.invalid(key, &format!("must be {}, found {}", rule, v)));
        }
        Ok(Some(v))
    }

    pub fn require_checked(&self, key: &str, rule: &str, ok: impl Fn(f64) -> bool) -> ConfigResult<f64> {
        self.get_checked(key, rule, ok)?.ok_or_else(|| self.missing(key))
    }

    pub fn get_positive(&self, key: &str) -> ConfigResult<Option<f64>> {
        self.get_checked(key, "positive", |v| v > 0.0)
    }

    pub fn require_positive(&self, key: &str) -> ConfigResult<f64> {
        self.require_checked(key, "positive", |v| v > 0.0)
    }

    pub fn get_usize(&self, key: &str) -> ConfigResult<Option<usize>> {
        Ok(self.get_parsed::<usize>(key, "a non-negative integer")?.map(|(v, _)| v))
    }

    pub fn get_u64(&self, key: &str) -> ConfigResult<Option<u64>> {
        Ok(self.get_parsed::<u64>(key, "a non-negative integer")?.map(|(v, _)| v))
    }

    /// Comma-separated numbers.
    pub fn get_list(&self, key: &str) -> ConfigResult<Option<Vec<f64>>> {
        let Some(e) = self.entry(key) else { return Ok(None) };
        let mut out = Vec::new();
        for item in e.value.split(',') {
            let item = item.trim();
            match item.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => {
                    return Err(ConfigError::at(
                        e.line,
                        format!("`{}` must be a comma-separated list of finite numbers; bad item `{}`", key, item),
                    ))
                }
            }
        }
        Ok(Some(out))
    }

    /// Error anchored at `key` when present, at the header otherwise.
    pub fn invalid(&self, key: &str, detail: &str) -> ConfigError {
        match self.entries.iter().find(|e| e.key == key) {
            Some(e) => ConfigError::at(e.line, format!("`{}` {}", key, detail)),
            None if self.line > 0 => ConfigError::at(self.line, format!("{}: {}", self.label(), detail)),
            None => ConfigError::global(format!("{}: {}", self.label(), detail)),
        }
    }

    /// Line of `key` without marking it read.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.line)
    }
}
