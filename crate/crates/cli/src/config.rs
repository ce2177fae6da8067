//! Run configuration: a strict JSON document. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use motor_adapt_core::analysis::{SweepOptions, DEFAULT_ASYMPTOTE_TOL, DEFAULT_RESIDUAL_TOL};
use motor_adapt_core::paradigm::{DEFAULT_CONV_TOL, DEFAULT_MAX_TRIALS};
use motor_adapt_core::{
    CoupledModelParams, Error as CoreError, Model, Paradigm, Protocol, RateFunction,
    StandardSsmParams,
};

use crate::CliError;

const DEFAULT_TRIALS: usize = 100;
const DEFAULT_CLAMP: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelKindConfig {
    Standard,
    #[default]
    Coupled,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub kind: ModelKindConfig,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub k: Option<f64>,
    pub rate: Option<RateFunction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ParadigmKind {
    #[default]
    Ticvf,
    Vmr,
    Washout,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    #[serde(default)]
    pub kind: ParadigmKind,
    pub e_clamp: Option<f64>,
    pub target: Option<f64>,
    pub n_trials: Option<usize>,
    pub x0: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub conv_tol: Option<f64>,
    pub n_max: Option<usize>,
    pub asymptote_tol: Option<f64>,
    pub residual_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    pub errors: Option<Vec<f64>>,
}

fn invalid(section: &str, err: CoreError) -> CliError {
    match err {
        CoreError::InvalidParameters { field, value, reason } => {
            CliError::Input(format!("{section}.{field}: {reason} (got {value})"))
        }
        other => CliError::Input(format!("{section}: {other}")),
    }
}

fn unused(section: &str, field: &str, kind: &str, present: bool) -> Result<(), CliError> {
    if present {
        Err(CliError::Input(format!(
            "{section}.{field}: not a parameter of a {kind}"
        )))
    } else {
        Ok(())
    }
}

impl RunConfig {
    pub fn model(&self) -> Result<Model, CliError> {
        let m = &self.model;
        match m.kind {
            ModelKindConfig::Standard => {
                unused("model", "k", "standard model", m.k.is_some())?;
                unused("model", "rate", "standard model", m.rate.is_some())?;
                let defaults = StandardSsmParams::default();
                StandardSsmParams::new(
                    m.a.unwrap_or(defaults.retention()),
                    m.b.unwrap_or(defaults.gain()),
                )
                .map(Model::Standard)
                .map_err(|e| invalid("model", e))
            }
            ModelKindConfig::Coupled => {
                unused("model", "a", "coupled model", m.a.is_some())?;
                unused("model", "b", "coupled model", m.b.is_some())?;
                let defaults = CoupledModelParams::default();
                let rate = m.rate.unwrap_or_default();
                rate.validate().map_err(|e| invalid("model.rate", e))?;
                CoupledModelParams::new(m.k.unwrap_or(defaults.drive()), rate)
                    .map(Model::Coupled)
                    .map_err(|e| invalid("model", e))
            }
        }
    }

    pub fn standard_model(&self) -> Result<StandardSsmParams, CliError> {
        if self.model.kind != ModelKindConfig::Standard
            && (self.model.k.is_some() || self.model.rate.is_some())
        {
            return Err(CliError::Input(
                "model.kind: falsification needs a standard model".into(),
            ));
        }
        let cfg = RunConfig {
            model: ModelConfig {
                kind: ModelKindConfig::Standard,
                ..self.model.clone()
            },
            ..RunConfig::default()
        };
        match cfg.model()? {
            Model::Standard(p) => Ok(p),
            Model::Coupled(_) => unreachable!(),
        }
    }

    pub fn protocol(&self) -> Result<Protocol, CliError> {
        let p = &self.protocol;
        let paradigm = match p.kind {
            ParadigmKind::Ticvf => {
                unused("protocol", "target", "ticvf protocol", p.target.is_some())?;
                Paradigm::Ticvf {
                    e_clamp: p.e_clamp.unwrap_or(DEFAULT_CLAMP),
                }
            }
            ParadigmKind::Vmr => {
                unused("protocol", "e_clamp", "vmr protocol", p.e_clamp.is_some())?;
                let target = p.target.ok_or_else(|| {
                    CliError::Input("protocol.target: required for a vmr protocol".into())
                })?;
                Paradigm::Vmr { target }
            }
            ParadigmKind::Washout => {
                unused("protocol", "e_clamp", "washout protocol", p.e_clamp.is_some())?;
                unused("protocol", "target", "washout protocol", p.target.is_some())?;
                Paradigm::Washout
            }
        };
        Protocol::new(
            paradigm,
            p.n_trials.unwrap_or(DEFAULT_TRIALS),
            p.x0.unwrap_or(0.0),
        )
        .map_err(|e| invalid("protocol", e))
    }

    pub fn sweep_options(&self) -> Result<SweepOptions, CliError> {
        let a = &self.analysis;
        let opts = SweepOptions {
            x0: self.protocol.x0.unwrap_or(0.0),
            conv_tol: a.conv_tol.unwrap_or(DEFAULT_CONV_TOL),
            n_max: a.n_max.unwrap_or(DEFAULT_MAX_TRIALS),
            asymptote_tol: a.asymptote_tol.unwrap_or(DEFAULT_ASYMPTOTE_TOL),
        };
        positive("analysis.conv_tol", opts.conv_tol)?;
        positive("analysis.asymptote_tol", opts.asymptote_tol)?;
        if opts.n_max == 0 {
            return Err(CliError::Input("analysis.n_max: must be at least 1".into()));
        }
        if !opts.x0.is_finite() {
            return Err(CliError::Input("protocol.x0: must be finite".into()));
        }
        Ok(opts)
    }

    pub fn residual_tol(&self) -> Result<f64, CliError> {
        let tol = self.analysis.residual_tol.unwrap_or(DEFAULT_RESIDUAL_TOL);
        positive("analysis.residual_tol", tol)?;
        Ok(tol)
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("{field}: must be positive (got {v})")))
    }
}

/// Sets `path` (dotted) in a JSON object tree, creating objects as needed.
fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Input(format!("--set {path}: empty key segment")));
        }
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::Input(format!("--set {path}: `{}` is not an object", parts[..i].join(".")))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Applies `key=value` overrides; values are read as JSON, falling back to strings.
pub fn apply_overrides(root: &mut Value, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("--set {item}: expected key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(root, key.trim(), value)?;
    }
    Ok(())
}

pub fn parse_config(text: &str, origin: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut root: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
    if !root.is_object() {
        return Err(CliError::Input(format!("{origin}: top level must be an object")));
    }
    apply_overrides(&mut root, overrides)?;
    // Re-parse from text when there are no overrides so serde reports line numbers.
    let parsed = if overrides.is_empty() {
        serde_json::from_str(text)
    } else {
        serde_json::from_value(root)
    };
    parsed.map_err(|e| CliError::Input(format!("{origin}: {e}")))
}

pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Input(format!("cannot read config {}: {e}", path.display()))
            })?;
            parse_config(&text, &path.display().to_string(), overrides)
        }
        None => parse_config("{}", "defaults", overrides),
    }
}
