use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evenly spaced wavenumbers `min, ..., max` (`count` points, endpoints included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl KGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|j| if j + 1 == self.count { self.max } else { self.min + step * j as f64 })
            .collect()
    }
}

/// How the Bloch frequency is chosen for an amplitude `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum XiRule {
    Fixed { value: f64 },
    /// `ξ = factor · |a|`
    Proportional { factor: f64 },
}

impl XiRule {
    pub fn xi(&self, a: f64) -> f64 {
        match *self {
            XiRule::Fixed { value } => value,
            XiRule::Proportional { factor } => factor * a.abs(),
        }
    }
}

impl Default for XiRule {
    fn default() -> Self {
        XiRule::Proportional { factor: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Asymptotic,
    Numeric,
    #[default]
    Both,
}

impl Mode {
    pub fn numeric(&self) -> bool {
        matches!(self, Mode::Numeric | Mode::Both)
    }

    pub fn asymptotic(&self) -> bool {
        matches!(self, Mode::Asymptotic | Mode::Both)
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(Mode::Asymptotic),
            "numeric" => Ok(Mode::Numeric),
            "both" => Ok(Mode::Both),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Asymptotic => "asymptotic",
            Mode::Numeric => "numeric",
            Mode::Both => "both",
        })
    }
}

fn default_b() -> f64 {
    1.0
}

fn default_n() -> usize {
    crate::bloch::DEFAULT_HILL_TRUNCATION
}

/// A stability scan over `k_grid × a_list`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_b")]
    pub b: f64,
    pub a_list: Vec<f64>,
    pub k_grid: KGrid,
    #[serde(default)]
    pub xi_rule: XiRule,
    /// Fourier truncation used for both the profile and the Hill matrix
    #[serde(default = "default_n", rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.b > 0.0 && self.b.is_finite()) {
            return bad(format!("b must be positive, got {}", self.b));
        }
        if self.a_list.is_empty() {
            return bad("a_list is empty".into());
        }
        if let Some(a) = self.a_list.iter().find(|a| !a.is_finite()) {
            return bad(format!("amplitude {a} is not finite"));
        }
        let KGrid { min, max, count } = self.k_grid;
        if count == 0 {
            return bad("k_grid.count must be at least 1".into());
        }
        if !(min > 0.0 && min.is_finite() && max.is_finite()) {
            return bad(format!("k_grid.min must be positive, got {min}"));
        }
        if min > max || (count == 1 && min != max) {
            return bad(format!("k_grid range [{min}, {max}] with {count} points is not ordered"));
        }
        match self.xi_rule {
            XiRule::Fixed { value } if !(value.abs() <= 0.5 && value.is_finite()) => {
                return bad(format!("fixed xi {value} is outside [-1/2, 1/2]"));
            }
            XiRule::Proportional { factor } if !(factor > 0.0 && factor.is_finite()) => {
                return bad(format!("xi factor must be positive, got {factor}"));
            }
            _ => {}
        }
        if self.n < 8 {
            return bad(format!("N must be at least 8, got {}", self.n));
        }
        Ok(())
    }

    /// Parses TOML for `.toml` paths and JSON otherwise, then validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let cfg = if is_toml {
            Self::from_toml(&text)?
        } else {
            Self::from_json(&text)?
        };
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
