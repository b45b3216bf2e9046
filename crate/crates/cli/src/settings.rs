//! `key=value` config files and flag/file/default precedence.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::CliError;

/// Parsed `key=value` lines. Blank lines and `#` comments are skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::invalid(format!("config line {}: expected key=value", n + 1))
            })?;
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read config {path}: {e}")))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the file's value, else `None`.
    pub fn resolve<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|_| CliError::invalid(format!("config key {key}: cannot parse {s:?}")))
            })
            .transpose()
    }

    pub fn resolve_list(
        &self,
        key: &str,
        flag: Option<Vec<f64>>,
    ) -> Result<Option<Vec<f64>>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key).map(parse_list).transpose()
    }
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::invalid(format!("not a number: {p:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_precedence() {
        let cfg = ConfigFile::parse("# demo\nseed = 7\nmus=25,15\n\nlambda=3.5\n").unwrap();
        assert_eq!(cfg.resolve::<u64>("seed", None).unwrap(), Some(7));
        assert_eq!(cfg.resolve::<u64>("seed", Some(9)).unwrap(), Some(9));
        assert_eq!(cfg.resolve::<u64>("packets", None).unwrap(), None);
        assert_eq!(
            cfg.resolve_list("mus", None).unwrap(),
            Some(vec![25.0, 15.0])
        );
        assert_eq!(
            cfg.resolve_list("mus", Some(vec![1.0])).unwrap(),
            Some(vec![1.0])
        );
        assert_eq!(cfg.resolve::<f64>("lambda", None).unwrap(), Some(3.5));
    }

    #[test]
    fn rejects_garbage() {
        assert!(ConfigFile::parse("seed").is_err());
        let cfg = ConfigFile::parse("seed=abc").unwrap();
        assert!(cfg.resolve::<u64>("seed", None).is_err());
        assert!(parse_list("1,x").is_err());
    }

    #[test]
    fn underscores_normalized() {
        let cfg = ConfigFile::parse("n_max=4").unwrap();
        assert_eq!(cfg.resolve::<usize>("n-max", None).unwrap(), Some(4));
    }
}
