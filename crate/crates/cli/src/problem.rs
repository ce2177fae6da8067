//! Fit problem files.
//!
//! ```json
//! {
//!   "model": "coupled-ramp",
//!   "data": ["ticvf_2.csv", "ticvf_6.csv"],
//!   "bounds": {"k": [0.5, 60.0]},
//!   "fixed": {},
//!   "starts": 16,
//!   "max_evals": 4000
//! }
//! ```
//!
//! Data paths are relative to the problem file. Parameters missing from both
//! `bounds` and `fixed` take the model's default bounds.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use motor_adapt_core::fitting::{FitProblem, ModelKind, Observation};
use motor_adapt_core::io::read_observation;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub model: String,
    pub data: Vec<PathBuf>,
    #[serde(default)]
    pub bounds: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    pub starts: Option<usize>,
    pub max_evals: Option<usize>,
    pub seed: Option<u64>,
}

pub struct LoadedProblem {
    pub file: ProblemFile,
    pub kind: ModelKind,
    pub observed: Vec<Observation>,
}

impl LoadedProblem {
    pub fn problem(&self) -> Result<FitProblem, CliError> {
        let names = self.kind.param_names();
        for name in self.file.bounds.keys().chain(self.file.fixed.keys()) {
            if !names.contains(&name.as_str()) {
                return Err(CliError::Input(format!(
                    "problem: {} has no parameter `{name}`",
                    self.kind
                )));
            }
        }
        let default_fixed = self.kind.default_fixed();
        let mut bounds = Vec::new();
        let mut fixed = Vec::new();
        for (&name, (lo, hi)) in names.iter().zip(self.kind.default_bounds()) {
            match (self.file.bounds.get(name), self.file.fixed.get(name)) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Input(format!(
                        "problem: `{name}` is both bounded and fixed"
                    )))
                }
                (Some(&[l, h]), None) => bounds.push((name, l, h)),
                (None, Some(&v)) => fixed.push((name, v)),
                (None, None) => match default_fixed.iter().find(|(n, _)| *n == name) {
                    Some(&(_, v)) => fixed.push((name, v)),
                    None => bounds.push((name, lo, hi)),
                },
            }
        }
        FitProblem::new(self.kind, self.observed.clone(), &bounds, &fixed)
            .map_err(|e| CliError::Input(format!("problem: {e}")))
    }
}

pub fn load(path: &Path) -> Result<LoadedProblem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read problem {}: {e}", path.display())))?;
    let file: ProblemFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let kind: ModelKind = file
        .model
        .parse()
        .map_err(|e| CliError::Input(format!("problem.model: {e}")))?;
    if file.data.is_empty() {
        return Err(CliError::Input("problem.data: no trajectory files".into()));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let observed = file
        .data
        .iter()
        .map(|rel| {
            let full = base.join(rel);
            let reader = File::open(&full)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", full.display())))?;
            read_observation(reader).map_err(|e| CliError::Input(format!("{}: {e}", full.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LoadedProblem {
        file,
        kind,
        observed,
    })
}
