//! Sweep parameters from a config file and the command line.
//!
//! The file format is flat `key = value` lines with `#` comments. Keys above
//! the first `[section]` header apply to every command; keys inside
//! `[fig3]` apply only to `fig3`. Command-line pairs are applied last.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use zeno_sense_core::{PolarizationMagnitude, PrecessionFrequency};

use crate::CliError;

/// Parameters for one command, with the set of keys it understands.
#[derive(Debug, Clone)]
pub struct Params {
    command: String,
    values: BTreeMap<String, String>,
    allowed: &'static [&'static str],
}

impl Params {
    pub fn new(command: &str, allowed: &'static [&'static str]) -> Self {
        Self {
            command: command.to_string(),
            values: BTreeMap::new(),
            allowed,
        }
    }

    /// Applies a config file. Sections for other commands are skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        let mut section: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    CliError::Config(format!("line {}: unterminated section header", k + 1))
                })?;
                section = Some(name.trim().to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected key = value, got {line:?}",
                    k + 1
                )));
            };
            if section.as_deref().is_none_or(|s| s == self.command) {
                self.set(key.trim(), value.trim())?;
            }
        }
        Ok(())
    }

    /// Applies one `key=value` pair.
    pub fn apply_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got {pair:?}")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !self.allowed.contains(&key) {
            return Err(CliError::Config(format!(
                "unknown parameter {key:?} for {}; accepted: {}",
                self.command,
                self.allowed.join(", ")
            )));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| {
                        CliError::Config(format!("{key} = {v:?} is not a finite number"))
                    })
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_required(&self, key: &str) -> Result<f64, CliError> {
        self.f64_opt(key)?
            .ok_or_else(|| CliError::Config(format!("missing required parameter {key}")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                CliError::Config(format!("{key} = {v:?} is not a non-negative integer"))
            }),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self.usize_or(key, default as usize)? as u64)
    }

    pub fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| CliError::Config(format!("{key}: bad entry {s:?}")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Polarization `mu0`, default 1.
    pub fn mu0(&self) -> Result<PolarizationMagnitude, CliError> {
        let m = self.f64_or("mu0", 1.0)?;
        PolarizationMagnitude::new(m).map_err(|e| CliError::Config(format!("mu0: {e}")))
    }

    /// Precession magnitude `omega`, default `2 pi`.
    pub fn omega(&self) -> Result<f64, CliError> {
        let w = self.f64_or("omega", 2.0 * PI)?;
        if w > 0.0 {
            Ok(w)
        } else {
            Err(CliError::Config(format!("omega = {w} must be positive")))
        }
    }

    /// Fixed probe from `wx`/`wz` if both are given, else from `omega` and
    /// `theta` (default `0.9 pi / 2`).
    pub fn probe(&self) -> Result<PrecessionFrequency, CliError> {
        let bad = |e| CliError::Config(format!("probe frequency: {e}"));
        match (self.f64_opt("wx")?, self.f64_opt("wz")?) {
            (Some(wx), Some(wz)) => PrecessionFrequency::new(wx, wz).map_err(bad),
            (None, None) => {
                let theta = self.f64_or("theta", 0.9 * PI / 2.0)?;
                PrecessionFrequency::from_angle(self.omega()?, theta).map_err(bad)
            }
            _ => Err(CliError::Config("wx and wz must be given together".into())),
        }
    }

    /// Grid axis `<name>_min`, `<name>_max`, `<name>_count`, `<name>_scale`.
    pub fn axis(&self, name: &str, default: Axis) -> Result<Axis, CliError> {
        let scale = match self.raw(&format!("{name}_scale")) {
            None => default.scale,
            Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(s) => {
                return Err(CliError::Config(format!(
                    "{name}_scale = {s:?}; expected linear or log"
                )))
            }
        };
        let axis = Axis {
            min: self.f64_or(&format!("{name}_min"), default.min)?,
            max: self.f64_or(&format!("{name}_max"), default.max)?,
            count: self.usize_or(&format!("{name}_count"), default.count)?,
            scale,
        };
        axis.validate(name)?;
        Ok(axis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// One sweep axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl Axis {
    pub const fn linear(min: f64, max: f64, count: usize) -> Self {
        Self {
            min,
            max,
            count,
            scale: Scale::Linear,
        }
    }

    pub fn validate(&self, name: &str) -> Result<(), CliError> {
        if self.count < 2 {
            return Err(CliError::Config(format!("{name}_count must be at least 2")));
        }
        if !(self.min < self.max) {
            return Err(CliError::Config(format!(
                "{name}_min = {} must be below {name}_max = {}",
                self.min, self.max
            )));
        }
        if self.scale == Scale::Log && !(self.min > 0.0) {
            return Err(CliError::Config(format!(
                "{name}_min must be positive on a log axis"
            )));
        }
        Ok(())
    }

    /// Grid points, endpoints included exactly.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    return self.max;
                }
                let f = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * f,
                    Scale::Log => self.min * (self.max / self.min).powf(f),
                }
            })
            .collect()
    }

    /// Checks every point lies in `[lo, hi]`.
    pub fn require_within(&self, name: &str, lo: f64, hi: f64) -> Result<(), CliError> {
        if self.min < lo || self.max > hi {
            return Err(CliError::Config(format!(
                "{name} grid [{}, {}] must lie within [{lo}, {hi}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}
