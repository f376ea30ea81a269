//! Flat `key = value` sweep configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Keys: `materials`, `f`, `lambda`, `H`, `R`, `a_points`, `outputs`,
//! `rel_tol`, `m_max`, `threads`. Lengths require an explicit `nm`, `um`,
//! or `m` suffix; list-valued keys (`f`, `H`) take comma-separated entries.
//! Unknown and duplicate keys are errors, with line numbers.

use std::str::FromStr;

use thiserror::Error;

use crate::materials::DielectricModel;
use crate::quadrature::QuadratureSettings;
use crate::sweep::{OutputSelection, SweepSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for {key}: {message}")]
    InvalidValue { line: usize, key: String, message: String },
    #[error("missing required key {key:?}")]
    MissingKey { key: &'static str },
    #[error("invalid sweep: {message}")]
    Invalid { message: String },
}

/// A sweep description with every field optional, so several sources
/// (config file, command-line flags) can be merged before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialSweep {
    pub materials: Option<(String, String)>,
    pub fill_fractions: Option<Vec<f64>>,
    pub wavelength: Option<f64>,
    pub gaps: Option<Vec<f64>>,
    pub sphere_radius: Option<f64>,
    pub a_points: Option<u32>,
    pub outputs: Option<OutputSelection>,
    pub rel_tol: Option<f64>,
    pub m_max: Option<u32>,
    pub threads: Option<usize>,
}

impl PartialSweep {
    /// Returns `self` with every field that `other` sets replaced by it.
    pub fn overridden_by(mut self, other: PartialSweep) -> PartialSweep {
        macro_rules! take {
            ($field:ident) => {
                if other.$field.is_some() {
                    self.$field = other.$field;
                }
            };
        }
        take!(materials);
        take!(fill_fractions);
        take!(wavelength);
        take!(gaps);
        take!(sphere_radius);
        take!(a_points);
        take!(outputs);
        take!(rel_tol);
        take!(m_max);
        take!(threads);
        self
    }

    /// Fills defaults, resolves materials, and validates into a runnable
    /// spec.
    pub fn finish(self) -> Result<SweepSpec, ConfigError> {
        let (high_name, low_name) =
            self.materials.ok_or(ConfigError::MissingKey { key: "materials" })?;
        let high = resolve_material(&high_name)?;
        let low = resolve_material(&low_name)?;
        let fill_fractions =
            self.fill_fractions.ok_or(ConfigError::MissingKey { key: "f" })?;
        let wavelength = self.wavelength.ok_or(ConfigError::MissingKey { key: "lambda" })?;
        let gaps = self.gaps.ok_or(ConfigError::MissingKey { key: "H" })?;
        let sphere_radius = self.sphere_radius.ok_or(ConfigError::MissingKey { key: "R" })?;

        let spec = SweepSpec {
            pair_label: format!(
                "{}-{}",
                high_name.trim().to_ascii_lowercase(),
                low_name.trim().to_ascii_lowercase()
            ),
            high,
            low,
            fill_fractions,
            wavelength,
            gaps,
            sphere_radius,
            a_points: self.a_points.unwrap_or(64),
            outputs: self.outputs.unwrap_or_default(),
            settings: QuadratureSettings {
                rel_tol: self.rel_tol.unwrap_or(1e-8),
                m_max: self.m_max.unwrap_or(512),
                ..QuadratureSettings::default()
            },
            threads: self.threads,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses config text into a partial sweep, without requiring completeness.
pub fn parse_config_partial(text: &str) -> Result<PartialSweep, ConfigError> {
    let mut partial = PartialSweep::default();
    let mut seen: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected key = value, got {content:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::Syntax { line, message: format!("empty value for {key:?}") });
        }
        if seen.iter().any(|k| k == key) {
            return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
        }
        seen.push(key.to_string());

        let invalid = |message: String| ConfigError::InvalidValue {
            line,
            key: key.to_string(),
            message,
        };

        match key {
            "materials" => {
                let (a, b) = value.split_once(',').ok_or_else(|| {
                    invalid("expected two comma-separated material names".into())
                })?;
                if b.contains(',') {
                    return Err(invalid("expected exactly two materials".into()));
                }
                // Resolve now so name errors carry the line number.
                resolve_material_at(a, line)?;
                resolve_material_at(b, line)?;
                partial.materials = Some((a.trim().to_string(), b.trim().to_string()));
            }
            "f" => partial.fill_fractions = Some(parse_f64_list(value).map_err(invalid)?),
            "lambda" => partial.wavelength = Some(parse_length(value).map_err(invalid)?),
            "H" => {
                let gaps: Result<Vec<f64>, String> =
                    value.split(',').map(|t| parse_length(t.trim())).collect();
                partial.gaps = Some(gaps.map_err(invalid)?);
            }
            "R" => partial.sphere_radius = Some(parse_length(value).map_err(invalid)?),
            "a_points" => {
                partial.a_points =
                    Some(value.parse::<u32>().map_err(|e| invalid(e.to_string()))?)
            }
            "outputs" => {
                partial.outputs = Some(OutputSelection::from_str(value).map_err(invalid)?)
            }
            "rel_tol" => {
                partial.rel_tol = Some(value.parse::<f64>().map_err(|e| invalid(e.to_string()))?)
            }
            "m_max" => {
                partial.m_max = Some(value.parse::<u32>().map_err(|e| invalid(e.to_string()))?)
            }
            "threads" => {
                partial.threads =
                    Some(value.parse::<usize>().map_err(|e| invalid(e.to_string()))?)
            }
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
    }
    Ok(partial)
}

/// Parses and validates a complete sweep configuration.
pub fn parse_config(text: &str) -> Result<SweepSpec, ConfigError> {
    parse_config_partial(text)?.finish()
}

/// Parses a length with a mandatory `nm`, `um`, or `m` suffix into meters.
pub fn parse_length(token: &str) -> Result<f64, String> {
    let token = token.trim();
    let (number, scale) = if let Some(v) = token.strip_suffix("nm") {
        (v, 1e-9)
    } else if let Some(v) = token.strip_suffix("um") {
        (v, 1e-6)
    } else if let Some(v) = token.strip_suffix('m') {
        (v, 1.0)
    } else {
        return Err(format!("length {token:?} needs a nm, um, or m suffix"));
    };
    let value: f64 =
        number.trim().parse().map_err(|_| format!("invalid number in length {token:?}"))?;
    if !(value.is_finite() && value > 0.0) {
        return Err(format!("length must be finite and > 0, got {token:?}"));
    }
    Ok(value * scale)
}

/// Parses a comma-separated list of floats.
pub fn parse_f64_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|_| format!("invalid number {t:?}"))
        })
        .collect()
}

fn resolve_material(name: &str) -> Result<DielectricModel, ConfigError> {
    name.parse::<DielectricModel>()
        .map_err(|e| ConfigError::Invalid { message: e.to_string() })
}

fn resolve_material_at(name: &str, line: usize) -> Result<DielectricModel, ConfigError> {
    name.trim().parse::<DielectricModel>().map_err(|e| ConfigError::InvalidValue {
        line,
        key: "materials".to_string(),
        message: e.to_string(),
    })
}
