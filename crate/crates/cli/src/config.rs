use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ncspectra_core::report::{Format, Mode, RunOptions};
use ncspectra_core::{oracle::DEFAULT_POINTS, Family, PotentialSpec};
use thiserror::Error;

pub const GRID_ENV: &str = "NCSPECTRA_GRID_N";

const KEYS: [&str; 13] =
    ["family", "a", "b", "c", "theta", "m", "n", "degree", "mode", "oracle", "format", "out", "no-timestamp"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// Raw `key = value` settings, file first and flags on top.
#[derive(Debug, Clone, Default)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn parse_file(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("config line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(invalid(format!("config line {}: unknown key '{key}'", lineno + 1)));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse_file(&text)
    }

    pub fn set(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.0.insert(key.into(), v);
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| invalid(format!("invalid value '{v}' for {key}"))))
            .transpose()
    }
}

fn list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>, ConfigError> {
    let items = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| invalid(format!("invalid {key} value '{s}'"))))
        .collect::<Result<Vec<T>, _>>()?;
    if items.is_empty() {
        return Err(invalid(format!("{key} list is empty")));
    }
    Ok(items)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: PotentialSpec,
    pub thetas: Vec<f64>,
    pub ms: Vec<i32>,
    pub level: usize,
    pub options: RunOptions,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub timestamp: bool,
}

impl RunConfig {
    pub fn resolve(settings: &Settings, grid_env: Option<&str>) -> Result<Self, ConfigError> {
        let family: Family = settings
            .get("family")
            .ok_or_else(|| invalid("missing --family, expected one of: even, inverse"))?
            .parse()
            .map_err(|e: ncspectra_core::Error| invalid(e.to_string()))?;
        let core = |e: ncspectra_core::Error| invalid(e.to_string());
        let (a0, b0, c0) = match family {
            Family::EvenPower => (1.0, 1.0, 1.0),
            Family::InversePower => (-2.0, 1.0, 0.0),
        };
        let a = settings.parsed("a")?.unwrap_or(a0);
        let b = settings.parsed("b")?.unwrap_or(b0);
        let c = settings.parsed("c")?.unwrap_or(c0);
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !f64::is_finite(v) {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        let spec = match family {
            Family::EvenPower => PotentialSpec::even_power(a, b, c),
            Family::InversePower => PotentialSpec::inverse_power(a, b),
        };
        let thetas: Vec<f64> = list("theta", settings.get("theta").unwrap_or("0"))?;
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(invalid("theta values must be finite"));
        }
        let ms = list("m", settings.get("m").unwrap_or("1"))?;
        let n: Option<usize> = settings.parsed("n")?;
        let degree: Option<usize> = settings.parsed("degree")?;
        let level = match family {
            Family::EvenPower => n.or(degree).unwrap_or(0),
            Family::InversePower => degree.or(n).unwrap_or(1),
        };
        let mode: Mode = settings.get("mode").map(str::parse).transpose().map_err(core)?.unwrap_or_default();
        let oracle = match settings.get("oracle").unwrap_or("on") {
            "on" | "true" => true,
            "off" | "false" => false,
            other => return Err(invalid(format!("invalid oracle '{other}', expected one of: on, off"))),
        };
        let format: Format = settings.get("format").map(str::parse).transpose().map_err(core)?.unwrap_or_default();
        let grid_points = match grid_env {
            Some(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= ncspectra_core::oracle::grid::MIN_POINTS)
                .ok_or_else(|| invalid(format!("{GRID_ENV} must be an integer >= 200, got '{v}'")))?,
            None => DEFAULT_POINTS,
        };
        let timestamp = !settings.parsed::<bool>("no-timestamp")?.unwrap_or(false);
        Ok(Self {
            spec,
            thetas,
            ms,
            level,
            options: RunOptions { mode, oracle, grid_points },
            format,
            out: settings.get("out").map(PathBuf::from),
            timestamp,
        })
    }

    pub fn single(&self) -> Result<(f64, i32), ConfigError> {
        match (self.thetas.as_slice(), self.ms.as_slice()) {
            ([t], [m]) => Ok((*t, *m)),
            _ => Err(invalid("this command takes a single theta and a single m")),
        }
    }
}
