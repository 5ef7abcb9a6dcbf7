//! Flat `key = value` run configuration.
//!
//! Values come from, in order of precedence: command-line flags, the config
//! file, built-in defaults. Every key that was looked up is recorded with
//! its resolved value so the run can write a manifest that reloads as a
//! config file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};

use crate::UsageError;

#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, (usize, String)>,
    used: Vec<String>,
    resolved: Vec<(String, String)>,
}

fn canonical(key: &str) -> String {
    key.trim().replace('_', "-")
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, (usize, String)>, UsageError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(UsageError(format!(
                "config line {}: expected `key = value`, got `{}`",
                n + 1,
                raw.trim()
            )));
        };
        let key = canonical(k);
        if key.is_empty() {
            return Err(UsageError(format!("config line {}: empty key", n + 1)));
        }
        if map.insert(key.clone(), (n + 1, v.trim().to_string())).is_some() {
            return Err(UsageError(format!("config line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(map)
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| UsageError(format!("cannot read config {}: {e}", p.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self {
            file,
            ..Self::default()
        })
    }

    fn from_file<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.used.push(key.to_string());
        match self.file.get(key) {
            Some((_, v)) if v.is_empty() => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| {
                UsageError(format!("config line {line}: bad value `{v}` for `{key}`: {e}")).into()
            }),
            None => Ok(None),
        }
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.push((key.to_string(), value));
    }

    /// Flag, else config file, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let from_file = self.from_file(key)?;
        let v = flag.or(from_file).unwrap_or(default);
        self.record(key, v.to_string());
        Ok(v)
    }

    /// Like [`Resolver::get`] without a default; unset keys are recorded
    /// as empty.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let from_file = self.from_file(key)?;
        let v = flag.or(from_file);
        self.record(key, v.as_ref().map(|x| x.to_string()).unwrap_or_default());
        Ok(v)
    }

    /// Required value.
    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.get_opt(key, flag)?
            .ok_or_else(|| UsageError(format!("missing required value `{key}` (flag --{key} or config key)")).into())
    }

    /// Comma-separated list.
    pub fn list<T>(&mut self, key: &str, flag: Option<&str>, default: &str) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let from_file: Option<String> = self.from_file(key)?;
        let raw = flag.map(str::to_string).or(from_file).unwrap_or_else(|| default.to_string());
        self.record(key, raw.clone());
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|e| UsageError(format!("bad entry `{s}` in `{key}`: {e}")).into())
            })
            .collect()
    }

    /// `name=value` pairs given by a repeatable flag, or a comma-separated
    /// list in the config file.
    pub fn params(&mut self, key: &str, flags: &[String]) -> Result<Vec<(String, f64)>> {
        let from_file: Option<String> = self.from_file(key)?;
        let entries: Vec<String> = if flags.is_empty() {
            from_file
                .map(|s| s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect())
                .unwrap_or_default()
        } else {
            flags.to_vec()
        };
        let mut out = Vec::with_capacity(entries.len());
        for e in &entries {
            let (name, value) = e
                .split_once('=')
                .ok_or_else(|| UsageError(format!("parameter `{e}` must look like name=value")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|err| UsageError(format!("parameter `{e}`: {err}")))?;
            out.push((name.trim().to_string(), value));
        }
        self.record(key, entries.join(","));
        Ok(out)
    }

    /// Fails on config keys this subcommand never asked for.
    pub fn finish(&self) -> Result<()> {
        let unknown: Vec<String> = self
            .file
            .iter()
            .filter(|(k, _)| !self.used.iter().any(|u| u == *k))
            .map(|(k, (line, _))| format!("`{k}` (line {line})"))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(UsageError(format!(
                "unknown config keys for this subcommand: {}",
                unknown.join(", ")
            ))
            .into())
        }
    }

    /// Writes the resolved configuration as a reloadable config file.
    pub fn write_manifest(&self, path: &Path, subcommand: &str) -> Result<()> {
        let mut text = format!(
            "# gpe {subcommand} {}\n# resolved configuration; reload with --config\n",
            env!("CARGO_PKG_VERSION")
        );
        for (k, v) in &self.resolved {
            text.push_str(&format!("{k} = {v}\n"));
        }
        std::fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_underscores() {
        let m = parse_config("# run\nq = 5  # attractive\nlambda_z=0.2\n\n").unwrap();
        assert_eq!(m["q"].1, "5");
        assert_eq!(m["lambda-z"], (3, "0.2".to_string()));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config("q 5").is_err());
        assert!(parse_config("= 5").is_err());
        assert!(parse_config("q = 1\nq = 2").is_err());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let mut r = Resolver {
            file: parse_config("q = 5\ndt = 0.01").unwrap(),
            ..Resolver::default()
        };
        assert_eq!(r.get("q", Some(7.0), 1.0).unwrap(), 7.0);
        assert_eq!(r.get("dt", None, 1.0).unwrap(), 0.01);
        assert_eq!(r.get("t-final", None, 10.0).unwrap(), 10.0);
        r.finish().unwrap();
        assert_eq!(r.resolved[0], ("q".to_string(), "7".to_string()));
    }

    #[test]
    fn unknown_keys_are_reported() {
        let mut r = Resolver {
            file: parse_config("q = 5\nbogus = 1").unwrap(),
            ..Resolver::default()
        };
        r.get("q", None, 1.0).unwrap();
        let err = r.finish().unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn params_and_lists() {
        let mut r = Resolver {
            file: parse_config("param = A=0.1, w=2\nscan = 0, 0.5,1").unwrap(),
            ..Resolver::default()
        };
        let p = r.params("param", &[]).unwrap();
        assert_eq!(p, vec![("A".to_string(), 0.1), ("w".to_string(), 2.0)]);
        let l: Vec<f64> = r.list("scan", None, "").unwrap();
        assert_eq!(l, vec![0.0, 0.5, 1.0]);
        assert!(r.params("x", &["nope".to_string()]).is_err());
    }
}
