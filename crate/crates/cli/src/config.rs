//! `key=value` configuration files and flag > file > default resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use covmap_core::measurements::parse_timestamp;

use crate::error::CliError;

/// Values read from a configuration file. Keys are normalised to
/// lowercase with `_` in place of `-`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

pub fn normalise_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl FileConfig {
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected key=value, got `{line}`",
                    i + 1
                )));
            };
            let key = normalise_key(k);
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!(
                    "config line {}: duplicate key `{key}`",
                    i + 1
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

/// Where a resolved value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    File,
    Default,
}

impl Source {
    fn as_str(self) -> &'static str {
        match self {
            Source::Flag => "flag",
            Source::File => "file",
            Source::Default => "default",
        }
    }
}

/// Resolves options against a config file and records the effective values.
#[derive(Debug)]
pub struct Resolver<'a> {
    file: &'a FileConfig,
    effective: BTreeMap<String, (String, Source)>,
}

impl<'a> Resolver<'a> {
    pub fn new(file: &'a FileConfig) -> Self {
        Self {
            file,
            effective: BTreeMap::new(),
        }
    }

    fn record(&mut self, key: &str, value: String, source: Source) {
        self.effective.insert(key.to_string(), (value, source));
    }

    fn file_value<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, CliError> {
        self.file
            .raw(key)
            .map(|raw| parse(raw).map_err(|e| CliError::Usage(format!("config key `{key}`: {e}"))))
            .transpose()
    }

    /// Optional value with a custom parser for the file layer.
    pub fn opt_with<T: Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
        parse: impl Fn(&str) -> Result<T, String>,
        show: impl Fn(&T) -> String,
    ) -> Result<Option<T>, CliError> {
        let (value, source) = match flag {
            Some(v) => (Some(v), Source::Flag),
            None => (self.file_value(key, parse)?, Source::File),
        };
        if let Some(v) = &value {
            self.record(key, show(v), source);
        }
        Ok(value)
    }

    pub fn opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        self.opt_with(key, flag, |s| s.parse::<T>().map_err(|e| e.to_string()), |v| v.to_string())
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        self.get_with(key, flag, default, |s| s.parse::<T>().map_err(|e| e.to_string()), |v| v.to_string())
    }

    /// Like [`Resolver::get`] for types that only render through `show`.
    pub fn get_with<T: Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
        parse: impl Fn(&str) -> Result<T, String>,
        show: impl Fn(&T) -> String,
    ) -> Result<T, CliError> {
        match self.opt_with(key, flag, parse, &show)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, show(&default), Source::Default);
                Ok(default)
            }
        }
    }

    pub fn flag(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        self.get(key, flag.then_some(true), false)
    }

    pub fn list<T>(&mut self, key: &str, flag: Option<Vec<T>>, default: Vec<T>) -> Result<Vec<T>, CliError>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        let show = |v: &Vec<T>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self.opt_with(key, flag, parse_list, show)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, show(&default), Source::Default);
                Ok(default)
            }
        }
    }

    pub fn instant(&mut self, key: &str, flag: Option<DateTime<Utc>>) -> Result<Option<DateTime<Utc>>, CliError> {
        self.opt_with(key, flag, parse_instant, covmap_core::measurements::format_timestamp)
    }

    /// Records a value computed from the data rather than configured.
    pub fn derived(&mut self, key: &str, value: String) {
        self.record(key, value, Source::Default);
    }

    /// Keys present in the file that no resolution step asked for.
    pub fn unused_file_keys(&self) -> Vec<String> {
        self.file
            .keys()
            .filter(|k| !self.effective.contains_key(*k))
            .map(str::to_string)
            .collect()
    }

    /// Effective configuration as sorted `key=value` lines, each followed
    /// by its source as a comment.
    pub fn render(&self) -> String {
        let mut out = String::from("# effective configuration (flag > file > default)\n");
        for (k, (v, s)) in &self.effective {
            out.push_str(&format!("{k}={v}\n"));
            out.push_str(&format!("# {k} from {}\n", s.as_str()));
        }
        out
    }
}

pub fn parse_list<T>(s: &str) -> Result<Vec<T>, String>
where
    T: FromStr,
    T::Err: Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

/// RFC 3339 instant or a bare `YYYY-MM-DD` date (midnight UTC).
pub fn parse_instant(s: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(d) = NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
    }
    parse_timestamp(s)
}
