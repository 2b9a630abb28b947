//! Flat `key = value` configuration with `[section]` headers.
//!
//! Values are strings, numbers, comma lists, or ranges written as
//! `lin(lo, hi, n)` / `log(lo, hi, n)`. Keys before the first header belong
//! to the section `run`.

use std::collections::BTreeMap;

use ggr_core::ConstantRegistry;
use sha2::{Digest, Sha256};

use crate::output::CliError;

#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
    pub hash: String,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = "run".to_string();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::input(format!("config line {}: unterminated section header", lineno + 1)))?;
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("config line {}: expected `key = value`", lineno + 1)))?;
            let key = k.trim().to_string();
            let sec = sections.entry(current.clone()).or_default();
            if sec.insert(key.clone(), v.trim().trim_matches('"').to_string()).is_some() {
                return Err(CliError::input(format!("key `{current}.{key}` given twice")));
            }
        }
        let digest = Sha256::digest(text.as_bytes());
        let hash = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Ok(Self { sections, hash })
    }

    pub fn section(&self, sec: &str) -> BTreeMap<String, String> {
        self.sections.get(sec).cloned().unwrap_or_default()
    }

    /// Rejects keys outside `allowed`, naming the first offender.
    pub fn check_keys(&self, sec: &str, allowed: &[&str]) -> Result<(), CliError> {
        if let Some(s) = self.sections.get(sec) {
            if let Some(k) = s.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(CliError::input(format!("unknown key `{sec}.{k}`")));
            }
        }
        Ok(())
    }

    pub fn str(&self, sec: &str, key: &str) -> Option<&str> {
        self.sections.get(sec).and_then(|s| s.get(key)).map(|s| s.as_str())
    }

    fn require(&self, sec: &str, key: &str) -> Result<&str, CliError> {
        self.str(sec, key).ok_or_else(|| CliError::input(format!("missing key `{sec}.{key}`")))
    }

    pub fn f64(&self, sec: &str, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        match (self.str(sec, key), default) {
            (None, Some(d)) => Ok(d),
            _ => {
                let v = self.require(sec, key)?;
                v.parse().map_err(|_| CliError::input(format!("key `{sec}.{key}`: `{v}` is not a number")))
            }
        }
    }

    pub fn usize(&self, sec: &str, key: &str, default: Option<usize>) -> Result<usize, CliError> {
        match (self.str(sec, key), default) {
            (None, Some(d)) => Ok(d),
            _ => {
                let v = self.require(sec, key)?;
                v.parse().map_err(|_| CliError::input(format!("key `{sec}.{key}`: `{v}` is not a non-negative integer")))
            }
        }
    }

    pub fn list(&self, sec: &str, key: &str, default: Option<&[f64]>) -> Result<Vec<f64>, CliError> {
        let v = match (self.str(sec, key), default) {
            (None, Some(d)) => return Ok(d.to_vec()),
            _ => self.require(sec, key)?,
        };
        let out = parse_values(v).map_err(|e| CliError::input(format!("key `{sec}.{key}`: {e}")))?;
        if out.is_empty() {
            return Err(CliError::input(format!("key `{sec}.{key}`: empty range")));
        }
        Ok(out)
    }

    pub fn usize_list(&self, sec: &str, key: &str, default: Option<&[usize]>) -> Result<Vec<usize>, CliError> {
        let d: Option<Vec<f64>> = default.map(|d| d.iter().map(|&x| x as f64).collect());
        let vals = self.list(sec, key, d.as_deref())?;
        vals.iter()
            .map(|&x| {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(CliError::input(format!("key `{sec}.{key}`: `{x}` is not a non-negative integer")))
                }
            })
            .collect()
    }

    /// Fitted defaults overridden by the `[registry]` section.
    pub fn registry(&self) -> Result<ConstantRegistry, CliError> {
        let mut reg = ConstantRegistry::fitted();
        for (k, _) in self.section("registry") {
            let v = self.f64("registry", &k, None)?;
            reg.set(&k, v);
        }
        Ok(reg)
    }
}

fn parse_values(v: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", s.trim()));
    for (name, log) in [("lin(", false), ("log(", true)] {
        if let Some(rest) = v.strip_prefix(name) {
            let inner = rest.strip_suffix(')').ok_or("unterminated range")?;
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return Err("a range needs (lo, hi, n)".into());
            }
            let (lo, hi) = (num(parts[0])?, num(parts[1])?);
            let n: usize = parts[2].trim().parse().map_err(|_| format!("`{}` is not a count", parts[2].trim()))?;
            if log && !(lo > 0.0 && hi > 0.0) {
                return Err("log range needs positive ends".into());
            }
            let (a, b) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
            return Ok((0..n)
                .map(|i| {
                    let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                    let y = a + (b - a) * t;
                    if log {
                        y.exp()
                    } else {
                        y
                    }
                })
                .collect());
        }
    }
    v.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_lists_and_ranges() {
        let c = Config::parse("seed = 3\n[bound]\nx = log(1e-6, 1e-2, 5) # comment\nd = 3\nz = 1, 2,3\n").unwrap();
        assert_eq!(c.usize("run", "seed", None).unwrap(), 3);
        let x = c.list("bound", "x", None).unwrap();
        assert_eq!(x.len(), 5);
        assert!((x[2] - 1e-4).abs() < 1e-16);
        assert_eq!(c.list("bound", "z", None).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(c.list("bound", "w", Some(&[4.0])).unwrap(), vec![4.0]);
        assert_eq!(parse_values("lin(0, 1, 3)").unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn errors_name_the_key() {
        let c = Config::parse("[thermo]\nbeta = abc\n").unwrap();
        let e = c.f64("thermo", "beta", None).unwrap_err();
        assert!(e.message.contains("thermo.beta"));
        assert_eq!(e.code, 2);
        assert!(c.f64("thermo", "mu", None).unwrap_err().message.contains("thermo.mu"));
        assert!(Config::parse("[a]\nx = 1\nx = 2\n").is_err());
        assert!(c.check_keys("thermo", &["d"]).unwrap_err().message.contains("thermo.beta"));
    }

    #[test]
    fn hash_tracks_content() {
        let a = Config::parse("x = 1\n").unwrap();
        let b = Config::parse("x = 2\n").unwrap();
        assert_ne!(a.hash, b.hash);
        assert_eq!(a.hash.len(), 16);
    }
}
