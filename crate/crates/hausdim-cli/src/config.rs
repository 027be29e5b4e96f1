//! Run configuration: problem selection, numeric knobs, and output
//! destinations, merged from flags, an optional config file, the
//! environment, and defaults in that order of precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("digit list must be nonempty")]
    EmptyDigits,
    #[error("digit list contains a repeat: {0}")]
    RepeatedDigit(u32),
    #[error("lambda must lie in [0, 1], got {0}")]
    LambdaOutOfRange(f64),
    #[error("spacing must be positive, got {0}")]
    NonpositiveSpacing(f64),
    #[error("planar spacing must be the reciprocal of an integer, got {0}")]
    NotUnitFraction(f64),
    #[error("truncation radius must exceed 2, got {0}")]
    RadiusTooSmall(f64),
    #[error("{name} must be positive, got {value}")]
    NonpositiveField { name: &'static str, value: f64 },
    #[error("safety factor must be at least 1, got {0}")]
    SafetyBelowOne(f64),
    #[error("unknown planar digit set {0:?}; expected I1, I2, or I3")]
    UnknownSet(String),
    #[error("unknown output format {0:?}; expected json or csv")]
    UnknownFormat(String),
    #[error("config file {path}: line {line}: expected key=value, got {text:?}")]
    MalformedLine {
        path: String,
        line: usize,
        text: String,
    },
    #[error("config file {path}: unknown key {key:?}")]
    UnknownKey { path: String, key: String },
    #[error("config file {path}: key {key:?}: {detail}")]
    BadValue {
        path: String,
        key: String,
        detail: String,
    },
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Named planar digit set selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComplexSetName {
    I1,
    I2,
    I3,
}

impl ComplexSetName {
    pub fn uses_tail(self) -> bool {
        matches!(self, ComplexSetName::I1 | ComplexSetName::I2)
    }
}

impl FromStr for ComplexSetName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "I1" => Ok(ComplexSetName::I1),
            "I2" => Ok(ComplexSetName::I2),
            "I3" => Ok(ComplexSetName::I3),
            _ => Err(ConfigError::UnknownSet(s.to_string())),
        }
    }
}

impl fmt::Display for ComplexSetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComplexSetName::I1 => "I1",
            ComplexSetName::I2 => "I2",
            ComplexSetName::I3 => "I3",
        })
    }
}

/// Which invariant set a run targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemSpec {
    Cantor { digits: Vec<u32> },
    Perturbed { lambda: f64 },
    Complex { set: ComplexSetName },
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::Cantor { digits } => {
                let list: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
                write!(f, "E[{}]", list.join(","))
            }
            ProblemSpec::Perturbed { lambda } => write!(f, "perturbed(lambda={lambda})"),
            ProblemSpec::Complex { set } => write!(f, "{set}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(ConfigError::UnknownFormat(s.to_string())),
        }
    }
}

/// A fully resolved run configuration; validation happens once, here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub h: f64,
    /// Digit truncation radius; consulted only by infinite planar sets.
    pub truncation_radius: f64,
    pub tol_s: f64,
    pub tol_eig: f64,
    pub margin_rings: usize,
    pub refine_depth: usize,
    pub safety_factor: f64,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub dump_matrix: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match &self.problem {
            ProblemSpec::Cantor { digits } => {
                if digits.is_empty() {
                    return Err(ConfigError::EmptyDigits);
                }
                let mut seen = std::collections::BTreeSet::new();
                for &d in digits {
                    if !seen.insert(d) {
                        return Err(ConfigError::RepeatedDigit(d));
                    }
                }
            }
            ProblemSpec::Perturbed { lambda } => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(ConfigError::LambdaOutOfRange(*lambda));
                }
            }
            ProblemSpec::Complex { set } => {
                if !(self.h > 0.0) {
                    return Err(ConfigError::NonpositiveSpacing(self.h));
                }
                let n = (1.0 / self.h).round();
                if n < 1.0 || (1.0 / self.h - n).abs() > 1e-9 * n {
                    return Err(ConfigError::NotUnitFraction(self.h));
                }
                if set.uses_tail() && !(self.truncation_radius > 2.0) {
                    return Err(ConfigError::RadiusTooSmall(self.truncation_radius));
                }
            }
        }
        if !(self.h > 0.0) {
            return Err(ConfigError::NonpositiveSpacing(self.h));
        }
        for (name, value) in [
            ("tol_s", self.tol_s),
            ("tol_eig", self.tol_eig),
            ("truncation_radius", self.truncation_radius),
        ] {
            if !(value > 0.0) {
                return Err(ConfigError::NonpositiveField { name, value });
            }
        }
        if !(self.safety_factor >= 1.0) {
            return Err(ConfigError::SafetyBelowOne(self.safety_factor));
        }
        Ok(())
    }
}

/// Options from flags or a config file, before defaults fill the gaps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub h: Option<f64>,
    pub truncation_radius: Option<f64>,
    pub tol_s: Option<f64>,
    pub tol_eig: Option<f64>,
    pub margin_rings: Option<usize>,
    pub refine_depth: Option<usize>,
    pub safety_factor: Option<f64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl PartialConfig {
    /// Fills unset fields from `fallback`; `self` wins every conflict.
    pub fn or(self, fallback: PartialConfig) -> PartialConfig {
        PartialConfig {
            h: self.h.or(fallback.h),
            truncation_radius: self.truncation_radius.or(fallback.truncation_radius),
            tol_s: self.tol_s.or(fallback.tol_s),
            tol_eig: self.tol_eig.or(fallback.tol_eig),
            margin_rings: self.margin_rings.or(fallback.margin_rings),
            refine_depth: self.refine_depth.or(fallback.refine_depth),
            safety_factor: self.safety_factor.or(fallback.safety_factor),
            jobs: self.jobs.or(fallback.jobs),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
        }
    }

    /// Resolves against defaults into a validated configuration.
    pub fn into_config(
        self,
        problem: ProblemSpec,
        default_h: f64,
    ) -> Result<RunConfig, ConfigError> {
        let config = RunConfig {
            problem,
            h: self.h.unwrap_or(default_h),
            truncation_radius: self.truncation_radius.unwrap_or(DEFAULT_TRUNCATION_RADIUS),
            tol_s: self.tol_s.unwrap_or(DEFAULT_TOL_S),
            tol_eig: self.tol_eig.unwrap_or(DEFAULT_TOL_EIG),
            margin_rings: self.margin_rings.unwrap_or(DEFAULT_MARGIN_RINGS),
            refine_depth: self.refine_depth.unwrap_or(DEFAULT_REFINE_DEPTH),
            safety_factor: self.safety_factor.unwrap_or(DEFAULT_SAFETY_FACTOR),
            jobs: self.jobs,
            out: self.out,
            format: self.format.unwrap_or(OutputFormat::Json),
            dump_matrix: None,
        };
        config.validate()?;
        Ok(config)
    }
}

pub const DEFAULT_TOL_S: f64 = 1e-12;
pub const DEFAULT_TOL_EIG: f64 = 1e-12;
pub const DEFAULT_MARGIN_RINGS: usize = 1;
pub const DEFAULT_REFINE_DEPTH: usize = 2;
pub const DEFAULT_SAFETY_FACTOR: f64 = 1.0 + 1e-12;
pub const DEFAULT_TRUNCATION_RADIUS: f64 = 100.0;
pub const DEFAULT_H_1D: f64 = 1e-4;
pub const DEFAULT_H_2D: f64 = 0.02;

/// Environment variable consulted for the default worker count.
pub const JOBS_ENV_VAR: &str = "HAUSDIM_JOBS";

pub fn jobs_from_env() -> Option<usize> {
    std::env::var(JOBS_ENV_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n > 0)
}

/// Parses the flat `key=value` config file format. Blank lines and
/// lines starting with `#` are ignored.
pub fn parse_config_file(path: &Path) -> Result<PartialConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let path_str = path.display().to_string();
    let mut seen: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::MalformedLine {
                path: path_str,
                line: idx + 1,
                text: raw.to_string(),
            });
        };
        seen.insert(key.trim().to_string(), value.trim().to_string());
    }

    let mut out = PartialConfig::default();
    for (key, value) in &seen {
        let bad = |detail: String| ConfigError::BadValue {
            path: path_str.clone(),
            key: key.clone(),
            detail,
        };
        match key.as_str() {
            "h" => out.h = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "truncation_radius" | "R" => {
                out.truncation_radius = Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "tol_s" => out.tol_s = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "tol_eig" => out.tol_eig = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "margin_rings" => {
                out.margin_rings = Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "refine_depth" => {
                out.refine_depth = Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "safety_factor" => {
                out.safety_factor = Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "jobs" => out.jobs = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "out" => out.out = Some(PathBuf::from(value)),
            "format" => {
                out.format = Some(value.parse().map_err(|e: ConfigError| bad(e.to_string()))?)
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    path: path_str,
                    key: key.clone(),
                })
            }
        }
    }
    Ok(out)
}
