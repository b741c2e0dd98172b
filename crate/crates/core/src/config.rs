//! Flat `key=value` configuration.
//!
//! ```text
//! # comment
//! theta=2
//! sigma2=power(1,0.25)
//! vol.kind=bachelier
//! vol.params=1,1
//! horizons=10,50,100
//! h=0.001
//! ```
//!
//! Blank lines and lines starting with `#` are ignored, unknown keys are
//! rejected, and overrides given as `key=value` strings are applied after
//! the file. [`Config::echo`] writes every key back out in a form that
//! re-parses to the same value.

use std::fmt::Write as _;

use crate::error::{Result, VolError};
use crate::harness::ExperimentConfig;
use crate::models::{parse_list, CoefFn, ModelSpec, VolKind, VolatilityModel};

/// Every accepted key, in echo order.
pub const KEYS: [&str; 14] = [
    "theta",
    "a",
    "sigma1",
    "sigma2",
    "vol.kind",
    "vol.params",
    "y0",
    "x0",
    "rho",
    "T",
    "h",
    "horizons",
    "n_paths",
    "seed",
];

/// Prefix of the lines that carry the resolved configuration in output
/// headers.
pub const HEADER_PREFIX: &str = "# config: ";

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub theta: f64,
    pub a: CoefFn,
    pub sigma1: CoefFn,
    pub sigma2: CoefFn,
    pub vol: VolKind,
    pub y0: f64,
    pub x0: f64,
    pub rho: f64,
    /// Strictly increasing; the last entry is the simulated horizon `T`.
    pub horizons: Vec<f64>,
    pub step: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl Default for Config {
    /// Linear model with Bachelier volatility at desk scale.
    fn default() -> Self {
        Config {
            theta: 2.0,
            a: CoefFn::IDENTITY,
            sigma1: CoefFn::IDENTITY,
            sigma2: CoefFn::ONE,
            vol: VolKind::Bachelier { alpha: 1.0, beta: 1.0 },
            y0: 1.0,
            x0: 1.0,
            rho: 0.0,
            horizons: vec![10.0, 50.0, 100.0],
            step: 1e-3,
            n_paths: 100,
            seed: 1,
        }
    }
}

/// Ordered `(key, value)` pairs; later assignments replace earlier ones.
#[derive(Clone, Debug, Default)]
struct Assignments(Vec<(String, String)>);

impl Assignments {
    fn set(&mut self, key: &str, value: &str) {
        self.0.retain(|(k, _)| k != key);
        self.0.push((key.to_string(), value.trim().to_string()));
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn split_assignment(s: &str) -> std::result::Result<(&str, &str), String> {
    let (key, value) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(format!("unknown key `{key}`"));
    }
    Ok((key, value))
}

fn real(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| VolError::Config(format!("{key}: `{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(VolError::Config(format!("{key} must be finite")));
    }
    Ok(x)
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    let xs = parse_list(v).map_err(|e| VolError::Config(format!("{key}: {e}")))?;
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(VolError::Config(format!("{key} entries must be finite")));
    }
    Ok(xs)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl Config {
    /// Parses a config file and applies `overrides` (`key=value`) on top.
    pub fn parse_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Self> {
        let mut file = Assignments::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = split_assignment(line).map_err(|msg| VolError::Parse { line: i + 1, msg })?;
            if file.get(key).is_some() {
                return Err(VolError::Parse { line: i + 1, msg: format!("duplicate key `{key}`") });
            }
            file.set(key, value);
        }
        for o in overrides {
            let (key, value) = split_assignment(o.as_ref()).map_err(VolError::Config)?;
            file.set(key, value);
        }
        Self::from_assignments(&file)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides::<&str>(text, &[])
    }

    /// Recovers the configuration from an output header written with
    /// [`Config::header`].
    pub fn from_header(text: &str) -> Result<Self> {
        let body: String =
            text.lines().filter_map(|l| l.strip_prefix(HEADER_PREFIX)).map(|l| format!("{l}\n")).collect();
        Self::parse(&body)
    }

    fn from_assignments(kv: &Assignments) -> Result<Self> {
        let mut cfg = Config::default();
        let coef = |key: &str, v: &str| -> Result<CoefFn> {
            v.parse().map_err(|e: VolError| VolError::Config(format!("{key}: {e}")))
        };
        if let Some(v) = kv.get("theta") {
            cfg.theta = real("theta", v)?;
        }
        if let Some(v) = kv.get("a") {
            cfg.a = coef("a", v)?;
        }
        if let Some(v) = kv.get("sigma1") {
            cfg.sigma1 = coef("sigma1", v)?;
        }
        if let Some(v) = kv.get("sigma2") {
            cfg.sigma2 = coef("sigma2", v)?;
        }
        match (kv.get("vol.kind"), kv.get("vol.params")) {
            (None, None) => {}
            (kind, params) => {
                let kind = kind.unwrap_or(cfg.vol.name());
                let params = match params {
                    Some(p) => list("vol.params", p)?,
                    None if kind == cfg.vol.name() => cfg.vol.params(),
                    None => return Err(VolError::Config(format!("vol.kind={kind} needs vol.params"))),
                };
                if params.iter().any(|p| !p.is_finite()) {
                    return Err(VolError::Config("vol.params must be finite".into()));
                }
                cfg.vol = VolKind::from_parts(kind, &params)?;
            }
        }
        if let Some(v) = kv.get("y0") {
            cfg.y0 = real("y0", v)?;
        }
        if let Some(v) = kv.get("x0") {
            cfg.x0 = real("x0", v)?;
        }
        if let Some(v) = kv.get("rho") {
            cfg.rho = real("rho", v)?;
            if cfg.rho.abs() > 1.0 {
                return Err(VolError::Config(format!("rho = {} must lie in [-1, 1]", cfg.rho)));
            }
        }
        if let Some(v) = kv.get("h") {
            cfg.step = real("h", v)?;
            if cfg.step <= 0.0 {
                return Err(VolError::Config(format!("h = {} must be positive", cfg.step)));
            }
        }
        let horizon = kv.get("T").map(|v| real("T", v)).transpose()?;
        match (kv.get("horizons"), horizon) {
            (Some(v), t) => {
                cfg.horizons = list("horizons", v)?;
                if let (Some(t), Some(&last)) = (t, cfg.horizons.last()) {
                    if t != last {
                        return Err(VolError::Config(format!("T = {t} differs from the largest horizon {last}")));
                    }
                }
            }
            (None, Some(t)) => cfg.horizons = vec![t],
            (None, None) => {}
        }
        if cfg.horizons.is_empty() {
            return Err(VolError::Config("horizons must not be empty".into()));
        }
        if cfg.horizons[0] <= 0.0 || cfg.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(VolError::Config(format!(
                "horizons must be positive and strictly increasing, got {}",
                join(&cfg.horizons)
            )));
        }
        if let Some(v) = kv.get("n_paths") {
            cfg.n_paths =
                v.parse().map_err(|_| VolError::Config(format!("n_paths: `{v}` is not a non-negative integer")))?;
            if cfg.n_paths == 0 {
                return Err(VolError::Config("n_paths must be at least 1".into()));
            }
        }
        if let Some(v) = kv.get("seed") {
            cfg.seed =
                v.parse().map_err(|_| VolError::Config(format!("seed: `{v}` is not a 64-bit unsigned integer")))?;
        }
        Ok(cfg)
    }

    /// Largest horizon.
    pub fn horizon(&self) -> f64 {
        *self.horizons.last().expect("horizons are non-empty")
    }

    /// Every key with its resolved value, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|&k| {
                let v = match k {
                    "theta" => self.theta.to_string(),
                    "a" => self.a.to_string(),
                    "sigma1" => self.sigma1.to_string(),
                    "sigma2" => self.sigma2.to_string(),
                    "vol.kind" => self.vol.name().to_string(),
                    "vol.params" => join(&self.vol.params()),
                    "y0" => self.y0.to_string(),
                    "x0" => self.x0.to_string(),
                    "rho" => self.rho.to_string(),
                    "T" => self.horizon().to_string(),
                    "h" => self.step.to_string(),
                    "horizons" => join(&self.horizons),
                    "n_paths" => self.n_paths.to_string(),
                    "seed" => self.seed.to_string(),
                    _ => unreachable!("every key is listed"),
                };
                (k, v)
            })
            .collect()
    }

    /// `key=value` lines that re-parse to `self`.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// [`Config::echo`] as comment lines for output headers.
    pub fn header(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{HEADER_PREFIX}{k}={v}");
        }
        out
    }

    /// Checked volatility model.
    pub fn volatility(&self) -> Result<VolatilityModel> {
        VolatilityModel::new(self.vol, self.y0)
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        Ok(ModelSpec {
            theta: self.theta,
            a: self.a,
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            vol: self.volatility()?,
            x0: self.x0,
            rho: self.rho,
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::new(self.spec()?, self.horizons.clone(), self.step, self.n_paths, self.seed)
    }
}
