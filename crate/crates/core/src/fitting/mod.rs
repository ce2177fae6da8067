//! Least-squares recovery of model parameters from observed trajectories.

mod simplex;
mod starts;

pub use simplex::{minimize, SimplexOptions, SimplexResult};
pub use starts::StartSequence;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{CoupledModelParams, Model, StandardSsmParams, TrialState};
use crate::paradigm::{Paradigm, Protocol, Trajectory, DIVERGENCE_LIMIT};
use crate::rate::RateFunction;

/// Objective reported for a diverged simulation.
pub const SENTINEL_OBJECTIVE: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Standard,
    CoupledRamp,
    CoupledSigmoid,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Standard => "standard",
            ModelKind::CoupledRamp => "coupled-ramp",
            ModelKind::CoupledSigmoid => "coupled-sigmoid",
        }
    }

    /// Parameter names in vector order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Standard => &["a", "b"],
            ModelKind::CoupledRamp => &["k", "p_max", "e_sat"],
            ModelKind::CoupledSigmoid => &["k", "p_max", "a", "b", "c"],
        }
    }

    /// Box bounds used when a problem does not specify its own.
    pub fn default_bounds(self) -> Vec<(f64, f64)> {
        match self {
            ModelKind::Standard => vec![(0.01, 0.999), (1e-4, 2.0)],
            ModelKind::CoupledRamp => vec![(0.5, 60.0), (0.005, 0.95), (0.25, 30.0)],
            ModelKind::CoupledSigmoid => {
                vec![(0.5, 60.0), (0.005, 0.95), (0.1, 10.0), (0.01, 10.0), (0.01, 5.0)]
            }
        }
    }

    /// Parameters held fixed by default. The sigmoid's numerator `a` cancels
    /// once the curve is rescaled to `p_max`, so it is not identifiable.
    pub fn default_fixed(self) -> Vec<(&'static str, f64)> {
        match self {
            ModelKind::CoupledSigmoid => vec![("a", 1.0)],
            _ => vec![],
        }
    }

    pub fn build(self, values: &[f64]) -> Result<Model> {
        if values.len() != self.param_names().len() {
            return Err(Error::InvalidInput(format!(
                "{} expects {} parameters, got {}",
                self.name(),
                self.param_names().len(),
                values.len()
            )));
        }
        Ok(match self {
            ModelKind::Standard => StandardSsmParams::new(values[0], values[1])?.into(),
            ModelKind::CoupledRamp => {
                CoupledModelParams::new(values[0], RateFunction::ramp(values[1], values[2])?)?.into()
            }
            ModelKind::CoupledSigmoid => CoupledModelParams::new(
                values[0],
                RateFunction::sigmoid(values[2], values[3], values[4], values[1])?,
            )?
            .into(),
        })
    }

    /// Inverse of [`ModelKind::build`], when `model` belongs to this kind.
    pub fn params_of(self, model: &Model) -> Option<Vec<f64>> {
        match (self, model) {
            (ModelKind::Standard, Model::Standard(p)) => Some(vec![p.retention(), p.gain()]),
            (ModelKind::CoupledRamp, Model::Coupled(p)) => match *p.rate() {
                RateFunction::Ramp { p_max, e_sat } => Some(vec![p.drive(), p_max, e_sat]),
                _ => None,
            },
            (ModelKind::CoupledSigmoid, Model::Coupled(p)) => match *p.rate() {
                RateFunction::Sigmoid { a, b, c, p_max } => Some(vec![p.drive(), p_max, a, b, c]),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(ModelKind::Standard),
            "coupled-ramp" | "coupled" => Ok(ModelKind::CoupledRamp),
            "coupled-sigmoid" => Ok(ModelKind::CoupledSigmoid),
            other => Err(Error::InvalidInput(format!("unknown model kind `{other}`"))),
        }
    }
}

/// One observed trajectory together with the protocol that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub paradigm: Paradigm,
    pub xs: Vec<f64>,
}

impl Observation {
    pub fn new(paradigm: Paradigm, xs: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::InvalidInput(
                "an observed trajectory needs at least two trials".into(),
            ));
        }
        if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite observation {x}")));
        }
        // Validates the paradigm's own fields.
        Protocol::new(paradigm, xs.len() - 1, xs[0])?;
        Ok(Observation { paradigm, xs })
    }

    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        Observation::new(traj.protocol.paradigm(), traj.xs().collect())
    }

    fn sse(&self, model: &Model) -> Option<f64> {
        let mut state = TrialState::initial(self.xs[0]);
        let mut sse = 0.0;
        for &obs in &self.xs[1..] {
            let e = self.paradigm.error_for_trial(state).ok()?;
            state = model.step(state, e);
            if !state.x.is_finite() || state.x.abs() > DIVERGENCE_LIMIT {
                return None;
            }
            sse += (state.x - obs).powi(2);
        }
        Some(sse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParam {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    kind: ModelKind,
    observed: Vec<Observation>,
    free: Vec<FreeParam>,
    /// Full parameter vector; free slots are overwritten per candidate.
    template: Vec<f64>,
}

impl FitProblem {
    /// `bounds` and `fixed` are keyed by parameter name. Every parameter must
    /// appear in exactly one of them.
    pub fn new(
        kind: ModelKind,
        observed: Vec<Observation>,
        bounds: &[(&str, f64, f64)],
        fixed: &[(&str, f64)],
    ) -> Result<Self> {
        if observed.is_empty() {
            return Err(Error::InvalidInput("no observed trajectories".into()));
        }
        let family = std::mem::discriminant(&observed[0].paradigm);
        if observed.iter().any(|o| std::mem::discriminant(&o.paradigm) != family) {
            return Err(Error::InvalidInput(
                "observed trajectories mix protocol families".into(),
            ));
        }

        let names = kind.param_names();
        let lookup = |name: &str| {
            names.iter().position(|n| *n == name).ok_or_else(|| {
                Error::InvalidInput(format!("{kind} has no parameter `{name}`"))
            })
        };
        let mut template = vec![f64::NAN; names.len()];
        let mut seen = vec![false; names.len()];
        let mark = |i: usize, seen: &mut Vec<bool>| {
            if std::mem::replace(&mut seen[i], true) {
                Err(Error::InvalidInput(format!("parameter `{}` given twice", names[i])))
            } else {
                Ok(())
            }
        };

        let mut free = Vec::new();
        for &(name, lower, upper) in bounds {
            let index = lookup(name)?;
            mark(index, &mut seen)?;
            if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                return Err(Error::InvalidInput(format!(
                    "bounds for `{name}` must be finite with lower < upper, got [{lower}, {upper}]"
                )));
            }
            template[index] = 0.5 * (lower + upper);
            free.push(FreeParam { index, lower, upper });
        }
        for &(name, value) in fixed {
            let index = lookup(name)?;
            mark(index, &mut seen)?;
            template[index] = value;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInput(format!(
                "parameter `{}` is neither free nor fixed",
                names[i]
            )));
        }
        if free.is_empty() {
            return Err(Error::InvalidInput("at least one parameter must be free".into()));
        }
        free.sort_by_key(|p| p.index);

        let problem = FitProblem {
            kind,
            observed,
            free,
            template,
        };
        // Each parameter's domain is an interval, so checking every corner of
        // the box covers the whole box.
        for corner in 0..(1u32 << problem.free.len()) {
            let unit: Vec<f64> = (0..problem.free.len())
                .map(|i| f64::from((corner >> i) & 1))
                .collect();
            kind.build(&problem.to_params(&unit))?;
        }
        Ok(problem)
    }

    /// Uses the kind's default bounds and fixed values.
    pub fn with_defaults(kind: ModelKind, observed: Vec<Observation>) -> Result<Self> {
        let fixed = kind.default_fixed();
        let bounds: Vec<(&str, f64, f64)> = kind
            .param_names()
            .iter()
            .zip(kind.default_bounds())
            .filter(|(n, _)| !fixed.iter().any(|(f, _)| f == *n))
            .map(|(n, (lo, hi))| (*n, lo, hi))
            .collect();
        FitProblem::new(kind, observed, &bounds, &fixed)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn observed(&self) -> &[Observation] {
        &self.observed
    }

    pub fn free(&self) -> &[FreeParam] {
        &self.free
    }

    pub fn free_names(&self) -> Vec<&'static str> {
        self.free.iter().map(|p| self.kind.param_names()[p.index]).collect()
    }

    /// Full parameter vector from unit-box coordinates of the free parameters.
    pub fn to_params(&self, unit: &[f64]) -> Vec<f64> {
        let mut values = self.template.clone();
        for (p, u) in self.free.iter().zip(unit) {
            values[p.index] = p.lower + u.clamp(0.0, 1.0) * (p.upper - p.lower);
        }
        values
    }

    fn to_unit(&self, params: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .map(|p| (params[p.index] - p.lower) / (p.upper - p.lower))
            .collect()
    }

    /// Number of distinct clamped errors or targets across the observations.
    pub fn distinct_conditions(&self) -> usize {
        let mut seen: Vec<f64> = Vec::new();
        for o in &self.observed {
            let key = match o.paradigm {
                Paradigm::Ticvf { e_clamp } => e_clamp,
                Paradigm::Vmr { target } => target,
                Paradigm::Washout => 0.0,
            };
            if !seen.contains(&key) {
                seen.push(key);
            }
        }
        seen.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    /// Sum of squared trial residuals in degrees², or [`SENTINEL_OBJECTIVE`].
    pub value: f64,
    pub diverged: bool,
}

/// Sum over trajectories and trials of `(x_sim - x_obs)^2`. `params` is the
/// full parameter vector in [`ModelKind::param_names`] order and must lie
/// inside the problem's bounds.
pub fn objective(problem: &FitProblem, params: &[f64]) -> Result<ObjectiveValue> {
    if params.len() != problem.template.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} parameters, got {}",
            problem.template.len(),
            params.len()
        )));
    }
    for p in &problem.free {
        let v = params[p.index];
        if !(v >= p.lower && v <= p.upper) {
            return Err(Error::InvalidInput(format!(
                "`{}` = {v} outside [{}, {}]",
                problem.kind.param_names()[p.index],
                p.lower,
                p.upper
            )));
        }
    }
    let model = problem.kind.build(params)?;
    Ok(score(problem, &model))
}

fn score(problem: &FitProblem, model: &Model) -> ObjectiveValue {
    let mut parts = Vec::with_capacity(problem.observed.len());
    for obs in &problem.observed {
        match obs.sse(model) {
            Some(v) => parts.push(v),
            None => {
                return ObjectiveValue {
                    value: SENTINEL_OBJECTIVE,
                    diverged: true,
                }
            }
        }
    }
    // Summing in sorted order makes the total independent of trajectory order.
    parts.sort_by(f64::total_cmp);
    ObjectiveValue {
        value: parts.iter().sum(),
        diverged: false,
    }
}

fn score_unit(problem: &FitProblem, unit: &[f64]) -> f64 {
    match problem.kind.build(&problem.to_params(unit)) {
        Ok(model) => score(problem, &model).value,
        Err(_) => SENTINEL_OBJECTIVE,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    /// Evaluation budget per start.
    pub max_evals: usize,
    /// Optional first start point (full parameter vector).
    pub initial: Option<Vec<f64>>,
    pub xtol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            starts: 16,
            seed: 0,
            max_evals: 4000,
            initial: None,
            xtol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartSummary {
    pub start: Vec<f64>,
    pub optimum: Vec<f64>,
    pub objective: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub kind: ModelKind,
    /// Full parameter vector in [`ModelKind::param_names`] order.
    pub params: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    pub iterations: usize,
    /// Index of the start that produced the best optimum.
    pub best_start: usize,
    pub starts: Vec<StartSummary>,
    /// The best start terminated on tolerance.
    pub converged: bool,
    /// Every start ended at the divergence sentinel.
    pub no_improvement: bool,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn model(&self) -> Result<Model> {
        self.kind.build(&self.params)
    }

    pub fn named_params(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.kind.param_names().iter().copied().zip(self.params.iter().copied())
    }
}

/// Multi-start bounded simplex descent. Deterministic for fixed options.
pub fn fit(problem: &FitProblem, opts: &FitOptions) -> Result<FitResult> {
    if opts.starts == 0 {
        return Err(Error::InvalidInput("starts must be at least 1".into()));
    }
    if opts.max_evals < 100 {
        return Err(Error::InvalidInput(format!(
            "max_evals must be at least 100, got {}",
            opts.max_evals
        )));
    }
    let dim = problem.free.len();
    let mut sequence = StartSequence::new(dim, opts.seed);
    let mut start_points: Vec<Vec<f64>> = Vec::with_capacity(opts.starts);
    if let Some(initial) = &opts.initial {
        objective(problem, initial)?;
        start_points.push(problem.to_unit(initial));
    }
    while start_points.len() < opts.starts {
        start_points.push(sequence.next().expect("infinite sequence"));
    }

    let simplex_opts = SimplexOptions {
        max_evals: opts.max_evals,
        xtol: opts.xtol,
        ..SimplexOptions::default()
    };
    let runs: Vec<SimplexResult> = start_points
        .iter()
        .map(|u| minimize(|v| score_unit(problem, v), u, &simplex_opts))
        .collect();

    // Best objective wins; ties go to the lowest start index.
    let best_start = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.fx.total_cmp(&b.fx).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one start");
    let best = &runs[best_start];

    let mut warnings = Vec::new();
    if problem.kind != ModelKind::Standard && problem.distinct_conditions() < 2 {
        warnings.push(
            "data spans a single error condition: rate and drive are only jointly identifiable"
                .to_string(),
        );
    }
    let no_improvement = runs.iter().all(|r| r.fx >= SENTINEL_OBJECTIVE);
    if no_improvement {
        warnings.push("every start ended at the divergence sentinel".to_string());
    }

    Ok(FitResult {
        kind: problem.kind,
        params: problem.to_params(&best.x),
        objective: best.fx,
        evaluations: runs.iter().map(|r| r.evals).sum(),
        iterations: runs.iter().map(|r| r.iterations).sum(),
        best_start,
        starts: start_points
            .iter()
            .zip(&runs)
            .map(|(u, r)| StartSummary {
                start: problem.to_params(u),
                optimum: problem.to_params(&r.x),
                objective: r.fx,
                evals: r.evals,
                converged: r.converged,
            })
            .collect(),
        converged: best.converged,
        no_improvement,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    pub coupled: FitResult,
    pub standard: FitResult,
    /// Standard objective divided by coupled objective (infinite when the
    /// coupled fit is exact).
    pub ratio: f64,
    pub warnings: Vec<String>,
}

impl ModelComparison {
    pub fn coupled_preferred(&self) -> bool {
        self.standard.objective > self.coupled.objective
    }
}

/// Fits the standard and coupled-ramp models to the same data.
pub fn cross_model_comparison(data: &[Observation], opts: &FitOptions) -> Result<ModelComparison> {
    if data.is_empty() {
        return Err(Error::InvalidInput("no observed trajectories".into()));
    }
    let opts = FitOptions {
        initial: None,
        ..opts.clone()
    };
    let coupled = fit(
        &FitProblem::with_defaults(ModelKind::CoupledRamp, data.to_vec())?,
        &opts,
    )?;
    let standard = fit(
        &FitProblem::with_defaults(ModelKind::Standard, data.to_vec())?,
        &opts,
    )?;
    let mut warnings = Vec::new();
    let problem = FitProblem::with_defaults(ModelKind::Standard, data.to_vec())?;
    if problem.distinct_conditions() < 2 {
        warnings.push("fewer than two distinct error conditions: comparison is weak".to_string());
    }
    Ok(ModelComparison {
        ratio: standard.objective / coupled.objective,
        coupled,
        standard,
        warnings,
    })
}

/// Clamped-error observations generated by `model`, one per error size.
pub fn synthetic_ticvf(model: &Model, errors: &[f64], n_trials: usize) -> Result<Vec<Observation>> {
    errors
        .iter()
        .map(|&e| {
            let traj = crate::paradigm::simulate(model, &Protocol::ticvf(e, n_trials)?)?;
            Observation::from_trajectory(&traj)
        })
        .collect()
}
