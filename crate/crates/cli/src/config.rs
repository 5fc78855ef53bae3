//! key=value config files and the small argument grammars.
//!
//! Precedence: command-line flags > config file entries > built-in defaults.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Parsed key=value file. Keys use the flag names with `-` or `_` freely.
pub struct ConfigFile {
    entries: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> anyhow::Result<ConfigFile> {
        let mut entries = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| anyhow::anyhow!("line {}: expected key=value", i + 1))?;
                entries.insert(key.trim().replace('-', "_"), value.trim().to_string());
            }
        }
        Ok(ConfigFile { entries })
    }

    /// Flag value if given, else the config entry, else None.
    pub fn resolve<T: FromStr>(&self, key: &str, flag: Option<T>) -> anyhow::Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            Some(text) => text
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config {key}={text}: {e}")),
            None => Ok(None),
        }
    }

    pub fn resolve_path(&self, key: &str, flag: Option<PathBuf>) -> anyhow::Result<Option<PathBuf>> {
        if flag.is_some() {
            return Ok(flag);
        }
        Ok(self.entries.get(key).map(PathBuf::from))
    }

    /// Boolean config entry (flags handle their own precedence).
    pub fn flag(&self, key: &str) -> anyhow::Result<bool> {
        match self.entries.get(key) {
            None => Ok(false),
            Some(v) => match v.as_str() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                other => Err(anyhow::anyhow!("config {key}={other}: expected a boolean")),
            },
        }
    }
}

/// Inclusive dimension range: `18` or `15..30`.
#[derive(Debug, Clone, Copy)]
pub struct RangeSpec {
    pub lo: u32,
    pub hi: u32,
}

impl FromStr for RangeSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<RangeSpec, String> {
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| e.to_string());
        match s.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (parse(lo)?, parse(hi)?);
                if lo > hi {
                    return Err(format!("empty range {lo}..{hi}"));
                }
                Ok(RangeSpec { lo, hi })
            }
            None => {
                let v = parse(s)?;
                Ok(RangeSpec { lo: v, hi: v })
            }
        }
    }
}

/// Exponent grammar: `jl` (p = p_JL(6,n)), `<factor>xjl`, or a float.
#[derive(Debug, Clone, Copy)]
pub enum PSpec {
    Jl,
    JlFactor(f64),
    Value(f64),
}

impl FromStr for PSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<PSpec, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("jl") {
            return Ok(PSpec::Jl);
        }
        if let Some(prefix) = s.strip_suffix("xjl").or_else(|| s.strip_suffix("xJL")) {
            let f = prefix
                .parse::<f64>()
                .map_err(|e| format!("bad factor in {s:?}: {e}"))?;
            if !(f > 0.0) {
                return Err(format!("factor must be positive, got {f}"));
            }
            return Ok(PSpec::JlFactor(f));
        }
        s.parse::<f64>().map(PSpec::Value).map_err(|e| format!("bad exponent {s:?}: {e}"))
    }
}

impl PSpec {
    pub fn resolve(self, n: u32) -> anyhow::Result<f64> {
        match self {
            PSpec::Value(p) => Ok(p),
            PSpec::Jl | PSpec::JlFactor(_) => {
                let pjl = match trilane::exponents::jl_exponent(trilane::exponents::Order::Six, n)? {
                    trilane::exponents::Exponent::Finite(v) => v,
                    trilane::exponents::Exponent::Infinite => {
                        anyhow::bail!("p_JL(6, {n}) is infinite")
                    }
                };
                Ok(match self {
                    PSpec::Jl => pjl,
                    PSpec::JlFactor(f) => f * pjl,
                    PSpec::Value(_) => unreachable!(),
                })
            }
        }
    }
}
