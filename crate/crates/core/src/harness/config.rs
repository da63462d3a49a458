//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::engine::EngineSettings;
use crate::error::{CasimirError, Result};
use crate::material::DrudeParameters;
use crate::reflection::ReflectionScheme;

use super::Command;

/// Material keys; each may also appear with a `b.` prefix for the second model.
const MATERIAL_KEYS: &[&str] = &[
    "plasma_frequency",
    "relaxation",
    "reference_temperature",
    "debye_temperature",
    "residual_relaxation",
    "table",
];

const KEYS: &[&str] = &[
    "model",
    "model_b",
    "scheme",
    "z",
    "z_min",
    "z_max",
    "z_steps",
    "temperature",
    "temperatures",
    "radius",
    "tail_tolerance",
    "quadrature_tolerance",
    "max_terms",
    "entropy_step",
    "richardson_tolerance",
    "path_slope",
    "k_perp",
    "frequencies",
    "output",
];

/// Ordered key-value pairs after merging file and overrides.
pub type ConfigMap = BTreeMap<String, String>;

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// repeated keys keep the last value.
pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CasimirError::Parse {
            line: idx + 1,
            message: format!("expected 'key = value', found '{line}'"),
        })?;
        let key = key.trim();
        if !is_known_key(key) {
            return Err(CasimirError::Parse { line: idx + 1, message: format!("unknown key '{key}'") });
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Splits a `key=value` override.
pub fn parse_override(item: &str) -> Result<(String, String)> {
    let (k, v) = item
        .split_once('=')
        .ok_or_else(|| CasimirError::InvalidInput(format!("override '{item}' is not key=value")))?;
    let k = k.trim();
    if !is_known_key(k) {
        return Err(CasimirError::InvalidInput(format!("unknown key '{k}'")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

fn is_known_key(key: &str) -> bool {
    KEYS.contains(&key)
        || MATERIAL_KEYS.contains(&key)
        || key.strip_prefix("b.").is_some_and(|k| MATERIAL_KEYS.contains(&k))
}

/// Merge file entries with overrides; overrides win.
pub fn merge(mut base: ConfigMap, overrides: impl IntoIterator<Item = (String, String)>) -> ConfigMap {
    base.extend(overrides);
    base
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CasimirError {
    CasimirError::InvalidInput(format!("{key} = '{value}': {why}"))
}

pub(crate) fn number(map: &ConfigMap, key: &str) -> Result<Option<f64>> {
    map.get(key)
        .map(|v| v.parse::<f64>().map_err(|e| bad(key, v, e)))
        .transpose()
}

pub(crate) fn list(map: &ConfigMap, key: &str) -> Result<Option<Vec<f64>>> {
    map.get(key)
        .map(|v| {
            v.split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| bad(key, v, e)))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()
}

/// Which model family a plate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ideal,
    Plasma,
    Drude,
    NormalSkin,
    InfraredOptics,
    Tabulated,
    Vacuum,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "ideal" => ModelKind::Ideal,
            "plasma" => ModelKind::Plasma,
            "drude" => ModelKind::Drude,
            "normal-skin" => ModelKind::NormalSkin,
            "infrared-optics" => ModelKind::InfraredOptics,
            "tabulated" => ModelKind::Tabulated,
            "vacuum" => ModelKind::Vacuum,
            other => return Err(CasimirError::InvalidInput(format!("unknown model '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ideal => "ideal",
            ModelKind::Plasma => "plasma",
            ModelKind::Drude => "drude",
            ModelKind::NormalSkin => "normal-skin",
            ModelKind::InfraredOptics => "infrared-optics",
            ModelKind::Tabulated => "tabulated",
            ModelKind::Vacuum => "vacuum",
        }
    }
}

/// A plate model before construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub params: DrudeParameters,
    pub table: Option<PathBuf>,
}

impl ModelSpec {
    fn from_map(map: &ConfigMap, kind_key: &str, prefix: &str, fallback: Option<&ModelSpec>) -> Result<Self> {
        let kind = match map.get(kind_key) {
            Some(v) => ModelKind::parse(v)?,
            None => fallback.map_or(ModelKind::Drude, |f| f.kind),
        };
        let base = fallback.map_or(DrudeParameters::gold(), |f| f.params);
        let get = |k: &str, default: f64| -> Result<f64> {
            Ok(number(map, &format!("{prefix}{k}"))?.unwrap_or(default))
        };
        let params = DrudeParameters::new(
            get("plasma_frequency", base.plasma_frequency)?,
            get("relaxation", base.reference_relaxation)?,
            get("reference_temperature", base.reference_temperature)?,
            get("debye_temperature", base.debye_temperature)?,
            get("residual_relaxation", base.residual_relaxation)?,
        )?;
        let table = map
            .get(&format!("{prefix}table"))
            .map(PathBuf::from)
            .or_else(|| fallback.and_then(|f| f.table.clone()));
        if kind == ModelKind::Tabulated && table.is_none() {
            return Err(CasimirError::InvalidInput(format!("model {kind_key} = tabulated needs {prefix}table")));
        }
        Ok(ModelSpec { kind, params, table })
    }

    /// One-line description for CSV metadata.
    pub fn describe(&self) -> String {
        let p = &self.params;
        let mut s = format!(
            "{} plasma_frequency={:e} relaxation={:e} reference_temperature={} debye_temperature={} residual_relaxation={:e}",
            self.kind.name(),
            p.plasma_frequency,
            p.reference_relaxation,
            p.reference_temperature,
            p.debye_temperature,
            p.residual_relaxation
        );
        if let Some(t) = &self.table {
            s.push_str(&format!(" table={}", t.display()));
        }
        s
    }
}

/// Temperature of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Kelvin(f64),
    /// Frequency integral instead of the Matsubara sum.
    Zero,
}

impl Temperature {
    pub fn kelvin(self) -> f64 {
        match self {
            Temperature::Kelvin(t) => t,
            Temperature::Zero => 0.0,
        }
    }
}

/// Validated configuration of one harness invocation. All quantities SI.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model_a: ModelSpec,
    pub model_b: ModelSpec,
    /// `None` selects each model's natural route.
    pub scheme: Option<ReflectionScheme>,
    /// Strictly increasing separations, m.
    pub separations: Vec<f64>,
    pub temperature: Temperature,
    /// Strictly decreasing temperatures for entropy ladders, K.
    pub temperatures: Vec<f64>,
    pub sphere_radius: Option<f64>,
    pub settings: EngineSettings,
    pub path_slope: f64,
    pub fixed_k_perp: Option<f64>,
    /// Strictly decreasing imaginary frequencies, rad/s.
    pub frequencies: Vec<f64>,
    pub output: Option<PathBuf>,
}

fn in_unit_interval(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CasimirError::InvalidInput(format!("{key} must lie in (0, 1), got {v}")))
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CasimirError::InvalidInput(format!("{key} must be > 0, got {v}")))
    }
}

impl RunConfig {
    pub fn from_map(command: Command, map: &ConfigMap) -> Result<Self> {
        let model_a = ModelSpec::from_map(map, "model", "", None)?;
        let model_b = ModelSpec::from_map(map, "model_b", "b.", Some(&model_a))?;
        let scheme = map.get("scheme").map(|s| ReflectionScheme::parse(s)).transpose()?;

        let separations = match list(map, "z")? {
            Some(zs) => zs,
            None => match (number(map, "z_min")?, number(map, "z_max")?) {
                (Some(lo), Some(hi)) => {
                    let steps = number(map, "z_steps")?.unwrap_or(10.0);
                    if steps < 2.0 || steps.fract() != 0.0 {
                        return Err(CasimirError::InvalidInput(format!("z_steps must be an integer >= 2, got {steps}")));
                    }
                    let n = steps as usize;
                    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
                }
                (None, None) => vec![1e-6],
                _ => return Err(CasimirError::InvalidInput("z_min and z_max must be given together".into())),
            },
        };
        for &z in &separations {
            positive("z", z)?;
        }
        if separations.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CasimirError::InvalidInput("separation grid must be strictly increasing".into()));
        }

        let temperature = match number(map, "temperature")? {
            None => Temperature::Kelvin(300.0),
            Some(t) if t == 0.0 => Temperature::Zero,
            Some(t) => Temperature::Kelvin(positive("temperature", t)?),
        };
        let temperatures = list(map, "temperatures")?.unwrap_or_default();
        for &t in &temperatures {
            positive("temperatures", t)?;
        }
        if temperatures.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CasimirError::InvalidInput("temperatures must be strictly decreasing".into()));
        }

        let sphere_radius = number(map, "radius")?.map(|r| positive("radius", r)).transpose()?;

        let mut settings = match command {
            Command::EntropyScan | Command::NernstCheck => EngineSettings::high_precision(),
            _ => EngineSettings::default(),
        };
        if let Some(v) = number(map, "tail_tolerance")? {
            settings.truncation.tail_tolerance = in_unit_interval("tail_tolerance", v)?;
        }
        if let Some(v) = number(map, "quadrature_tolerance")? {
            settings.quadrature.rel = in_unit_interval("quadrature_tolerance", v)?;
        }
        if let Some(v) = number(map, "max_terms")? {
            if !(v >= 1.0 && v.fract() == 0.0) {
                return Err(CasimirError::InvalidInput(format!("max_terms must be a positive integer, got {v}")));
            }
            settings.truncation.max_terms = v as u64;
        }
        if let Some(v) = number(map, "entropy_step")? {
            settings.entropy_step = in_unit_interval("entropy_step", v)?;
        }
        if let Some(v) = number(map, "richardson_tolerance")? {
            settings.richardson_tolerance = in_unit_interval("richardson_tolerance", v)?;
        }

        let path_slope = number(map, "path_slope")?.unwrap_or(1.0);
        if !(path_slope.is_finite() && path_slope >= 0.0) {
            return Err(CasimirError::InvalidInput(format!("path_slope must be >= 0, got {path_slope}")));
        }
        let fixed_k_perp = number(map, "k_perp")?.map(|k| positive("k_perp", k)).transpose()?;
        let frequencies = list(map, "frequencies")?.unwrap_or_default();
        for &w in &frequencies {
            positive("frequencies", w)?;
        }
        if frequencies.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CasimirError::InvalidInput("frequencies must be strictly decreasing".into()));
        }

        Ok(RunConfig {
            command,
            model_a,
            model_b,
            scheme,
            separations,
            temperature,
            temperatures,
            sphere_radius,
            settings,
            path_slope,
            fixed_k_perp,
            frequencies,
            output: map.get("output").map(PathBuf::from),
        })
    }

    /// Parse a config file body, apply overrides, validate.
    pub fn from_sources(command: Command, file: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let base = match file {
            Some(text) => parse_config(text)?,
            None => ConfigMap::new(),
        };
        Self::from_map(command, &merge(base, overrides.iter().cloned()))
    }
}
