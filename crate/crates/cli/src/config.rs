//! Flat `key = value` configuration files.
//!
//! One file drives every subcommand; each command reads the keys it
//! needs. Geometry is given in integer base units (`base_unit` is the
//! power-of-two denominator), so a parsed tower is exact by construction
//! and non-integer entries are rejected outright.

use spectral_tower_core::construction::ConstructionConfig;
use spectral_tower_core::{Dyadic, TowerSpec};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

const KNOWN_KEYS: &[&str] = &[
    "dim",
    "base_unit",
    "halfwidths",
    "windows",
    "open_windows",
    "h",
    "count",
    "epsilon",
    "cubes",
    "a1",
    "tau",
    "ell",
    "h0",
    "delta_start",
    "max_refinements",
    "norm_floor",
    "seed",
    "solver_tol",
    "lambda",
    "theta",
    "truncations",
];

/// Parsed key-value pairs, order-preserving for the manifest snapshot.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, ConfigError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return err(format!("line {}: unknown key `{key}`", lineno + 1));
            }
            if entries.insert(key.clone(), value).is_some() {
                return err(format!("line {}: duplicate key `{key}`", lineno + 1));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<ConfigFile, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError(format!("`{key}` must be an integer"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("`{key}` must be a number"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn dyadic_or(&self, key: &str, default: Dyadic) -> Result<Dyadic, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => Dyadic::parse(v)
                .ok_or_else(|| ConfigError(format!("`{key}` must be a dyadic rational, got `{v}`"))),
        }
    }

    fn int_list(&self, key: &str) -> Result<Option<Vec<i64>>, ConfigError> {
        let Some(raw) = self.get(key) else { return Ok(None) };
        let mut out = Vec::new();
        for part in raw.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            match part.parse::<i64>() {
                Ok(v) => out.push(v),
                Err(_) => return err(format!("`{key}` must be comma-separated integers, got `{part}`")),
            }
        }
        Ok(Some(out))
    }

    /// The tower geometry, if the file carries one.
    pub fn tower(&self) -> Result<Option<TowerSpec>, ConfigError> {
        let Some(halfwidths) = self.int_list("halfwidths")? else {
            return Ok(None);
        };
        if let Some(dim) = self.get("dim") {
            if dim.trim() != "2" {
                return err("only dim = 2 is supported");
            }
        }
        let base_unit = self.u64_or("base_unit", 1)?;
        if base_unit == 0 || !base_unit.is_power_of_two() {
            return err("`base_unit` must be a positive power of two");
        }
        let exp = base_unit.trailing_zeros();
        let windows = self.int_list("windows")?.unwrap_or_default();
        let a: Vec<Dyadic> = halfwidths.iter().map(|&v| Dyadic::new(v, exp)).collect();
        let d: Vec<Dyadic> = windows.iter().map(|&v| Dyadic::new(v, exp)).collect();
        TowerSpec::from_halfwidths(&a, &d)
            .map(Some)
            .map_err(|e| ConfigError(format!("invalid tower: {e}")))
    }

    /// Construction parameters with the stock defaults filled in.
    pub fn construction(&self) -> Result<ConstructionConfig, ConfigError> {
        let defaults = ConstructionConfig::default();
        let config = ConstructionConfig {
            epsilon: self.f64_or("epsilon", defaults.epsilon)?,
            cubes: self.usize_or("cubes", defaults.cubes)?,
            a1: self.dyadic_or("a1", defaults.a1)?,
            tau: self.f64_opt("tau")?,
            ell: self.u64_or("ell", defaults.ell as u64)? as u32,
            h0: self.dyadic_or("h0", defaults.h0)?,
            delta_start: self.dyadic_or("delta_start", defaults.delta_start)?,
            max_refinements: self.u64_or("max_refinements", defaults.max_refinements as u64)? as u32,
            norm_floor: self.f64_or("norm_floor", defaults.norm_floor)?,
            seed: self.u64_or("seed", defaults.seed)?,
            solver_tol: self.f64_or("solver_tol", defaults.solver_tol)?,
        };
        config.validate().map_err(|e| ConfigError(format!("invalid construction config: {e}")))?;
        Ok(config)
    }

    pub fn truncations(&self, max: usize) -> Result<Vec<usize>, ConfigError> {
        match self.int_list("truncations")? {
            None => Ok((1..=max).collect()),
            Some(list) => {
                let mut out = Vec::new();
                for v in list {
                    if v < 1 || v as usize > max {
                        return err(format!("truncation {v} out of range 1..={max}"));
                    }
                    out.push(v as usize);
                }
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tower_in_base_units() {
        let cfg = ConfigFile::parse(
            "dim = 2\nbase_unit = 8\nhalfwidths = 8, 17\nwindows = 2 # quarter\n",
        )
        .unwrap();
        let t = cfg.tower().unwrap().unwrap();
        assert_eq!(t.count(), 2);
        assert_eq!(t.halfwidth(0), Dyadic::ONE);
        assert_eq!(t.halfwidth(1), Dyadic::new(17, 3));
        assert_eq!(t.window(0), Dyadic::new(1, 2));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfigFile::parse("halfwidths = 1.5\n").unwrap().tower().is_err());
        assert!(ConfigFile::parse("nonsense = 3\n").is_err());
        assert!(ConfigFile::parse("epsilon 0.1\n").is_err());
        assert!(ConfigFile::parse("epsilon = 0.1\nepsilon = 0.2\n").is_err());
        let cfg = ConfigFile::parse("base_unit = 3\nhalfwidths = 3\n").unwrap();
        assert!(cfg.tower().is_err());
    }

    #[test]
    fn construction_defaults_and_overrides() {
        let cfg = ConfigFile::parse("epsilon = 0.2\ncubes = 3\nh0 = 1/8\n").unwrap();
        let c = cfg.construction().unwrap();
        assert_eq!(c.epsilon, 0.2);
        assert_eq!(c.cubes, 3);
        assert_eq!(c.h0, Dyadic::inv_pow2(3));
        assert_eq!(c.seed, 7);
        assert!(c.tau.is_none());
    }
}
