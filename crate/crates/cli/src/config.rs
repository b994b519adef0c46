//! `key=value` configuration files, figure recipes and the merge with command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use plap_core::{Eps, ProblemParams};

use crate::UsageError;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "PLAP_CONFIG";

const KNOWN_KEYS: [&str; 8] = ["N", "p", "alpha", "eps", "tol", "tau_max", "offset", "caption"];

/// Parsed `key=value` pairs. Blank lines and lines starting with `#` are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("{origin}:{}: expected key=value", i + 1)))?;
            let k = k.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(UsageError(format!("{origin}:{}: unknown key '{k}'", i + 1)).into());
            }
            map.insert(k, v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Contents of the file named by `PLAP_CONFIG`, or nothing when it is unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| UsageError(format!("invalid value for {key}: '{s}'")).into()),
        }
    }

    /// Entries of `self` with missing keys filled from `fallback`.
    pub fn over(mut self, fallback: &KeyValues) -> Self {
        for (k, v) in &fallback.0 {
            self.0.entry(k.clone()).or_insert_with(|| v.clone());
        }
        self
    }
}

/// A figure recipe shipped with the binary.
#[derive(Debug, Clone, Copy)]
pub struct Recipe {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! recipes {
    ($($name:literal),* $(,)?) => {
        &[$(Recipe { name: $name, text: include_str!(concat!("../recipes/", $name, ".cfg")) }),*]
    };
}

pub const RECIPES: &[Recipe] = recipes!(
    "fig01", "fig02", "fig03", "fig04", "fig05", "fig06", "fig07", "fig08", "fig09", "fig10", "fig11", "fig12",
    "fig13", "fig14", "fig15", "fig16", "fig17",
);

pub fn recipe(name: &str) -> Result<KeyValues> {
    let r = RECIPES
        .iter()
        .find(|r| r.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| UsageError(format!("unknown recipe '{name}' (expected fig01 to fig17)")))?;
    KeyValues::parse(r.text, r.name)
}

/// Flag values, each overriding the configuration when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<u32>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub eps: Option<i32>,
    pub tol: Option<f64>,
    pub tau_max: Option<f64>,
}

/// Resolved settings: flags first, then the recipe, then `PLAP_CONFIG`.
#[derive(Debug, Clone)]
pub struct Settings {
    pub flags: Overrides,
    pub file: KeyValues,
}

impl Settings {
    pub fn new(flags: Overrides, recipe_name: Option<&str>) -> Result<Self> {
        let env = KeyValues::from_env()?;
        let file = match recipe_name {
            Some(name) => recipe(name)?.over(&env),
            None => env,
        };
        Ok(Self { flags, file })
    }

    fn pick<T: std::str::FromStr + Copy>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(key),
        }
    }

    fn need<T: std::str::FromStr + Copy>(&self, flag: Option<T>, key: &str, opt: &str) -> Result<T> {
        self.pick(flag, key)?
            .ok_or_else(|| UsageError(format!("missing {opt} (or {key} in {CONFIG_ENV})")).into())
    }

    pub fn n(&self) -> Result<u32> {
        self.need(self.flags.n, "N", "--N")
    }

    pub fn p(&self) -> Result<f64> {
        self.need(self.flags.p, "p", "--p")
    }

    pub fn params(&self) -> Result<ProblemParams> {
        let n = self.n()?;
        let p = self.p()?;
        let alpha = self.need(self.flags.alpha, "alpha", "--alpha")?;
        let eps = Eps::from_int(self.need(self.flags.eps, "eps", "--eps")?)?;
        Ok(ProblemParams::new(n, p, alpha, eps)?)
    }

    pub fn tol(&self) -> Result<Option<f64>> {
        let t = self.pick(self.flags.tol, "tol")?;
        match t {
            Some(t) if !(t > 0.0 && t.is_finite()) => Err(UsageError("tol must be positive".into()).into()),
            _ => Ok(t),
        }
    }

    pub fn tau_max(&self) -> Result<Option<f64>> {
        let t = self.pick(self.flags.tau_max, "tau_max")?;
        match t {
            Some(t) if !(t > 0.0 && t.is_finite()) => Err(UsageError("tau-max must be positive".into()).into()),
            _ => Ok(t),
        }
    }

    pub fn offset(&self) -> Result<Option<f64>> {
        self.file.get("offset")
    }

    pub fn caption(&self) -> Option<&str> {
        self.file.raw("caption")
    }
}
