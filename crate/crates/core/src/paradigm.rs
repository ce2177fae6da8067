//! Experiment protocols and multi-trial simulation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ErrorSignal, Model, TrialState};

/// `|x|` beyond this is treated as a divergent parameterization.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
pub const DEFAULT_CONV_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_TRIALS: usize = 10_000;

/// How the error on each trial is generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Paradigm {
    /// Task-irrelevant clamped feedback: the error is constant.
    Ticvf { e_clamp: f64 },
    /// Visuomotor rotation with a fixed target: `e = target - x`.
    Vmr { target: f64 },
    /// Zero error on every trial.
    Washout,
}

impl Paradigm {
    pub fn error_for_trial(&self, s: TrialState) -> Result<ErrorSignal> {
        match *self {
            Paradigm::Ticvf { e_clamp } => ErrorSignal::new(e_clamp),
            Paradigm::Vmr { target } => ErrorSignal::new(target - s.x),
            Paradigm::Washout => Ok(ErrorSignal::ZERO),
        }
    }

    fn validate(&self) -> Result<()> {
        let (field, value) = match *self {
            Paradigm::Ticvf { e_clamp } => ("e_clamp", e_clamp),
            Paradigm::Vmr { target } => ("target", target),
            Paradigm::Washout => return Ok(()),
        };
        crate::error::check_finite(field, value)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Paradigm::Ticvf { .. } => "ticvf",
            Paradigm::Vmr { .. } => "vmr",
            Paradigm::Washout => "washout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    paradigm: Paradigm,
    n_trials: usize,
    x0: f64,
}

impl Protocol {
    pub fn new(paradigm: Paradigm, n_trials: usize, x0: f64) -> Result<Self> {
        paradigm.validate()?;
        crate::error::check_finite("x0", x0)?;
        if n_trials == 0 {
            return Err(Error::InvalidInput("n_trials must be at least 1".into()));
        }
        Ok(Protocol {
            paradigm,
            n_trials,
            x0,
        })
    }

    pub fn ticvf(e_clamp: f64, n_trials: usize) -> Result<Self> {
        Protocol::new(Paradigm::Ticvf { e_clamp }, n_trials, 0.0)
    }

    pub fn vmr(target: f64, n_trials: usize) -> Result<Self> {
        Protocol::new(Paradigm::Vmr { target }, n_trials, 0.0)
    }

    pub fn washout(n_trials: usize, x0: f64) -> Result<Self> {
        Protocol::new(Paradigm::Washout, n_trials, x0)
    }

    pub fn with_x0(self, x0: f64) -> Result<Self> {
        Protocol::new(self.paradigm, self.n_trials, x0)
    }

    pub fn paradigm(&self) -> Paradigm {
        self.paradigm
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn error_for_trial(&self, s: TrialState) -> Result<ErrorSignal> {
        self.paradigm.error_for_trial(s)
    }
}

/// One row of a trajectory: the state entering trial `n`, the error on that
/// trial and the rate applied to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub x: f64,
    pub e: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub model: Model,
    pub protocol: Protocol,
    pub records: Vec<TrialRecord>,
}

impl Trajectory {
    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.x)
    }

    pub fn final_x(&self) -> f64 {
        self.records.last().map_or(self.protocol.x0, |r| r.x)
    }

    /// `|x_N - x_{N-1}|` for the last two records.
    pub fn last_step(&self) -> Option<f64> {
        match self.records.as_slice() {
            [.., a, b] => Some((b.x - a.x).abs()),
            _ => None,
        }
    }
}

/// Simulation that ran until a step fell below a tolerance or a trial cap.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergedRun {
    pub trajectory: Trajectory,
    /// False when the trial cap was reached first.
    pub converged: bool,
}

struct Stepper<'a> {
    model: &'a Model,
    protocol: &'a Protocol,
    state: TrialState,
    records: Vec<TrialRecord>,
}

impl<'a> Stepper<'a> {
    fn new(model: &'a Model, protocol: &'a Protocol, capacity: usize) -> Result<Self> {
        let state = TrialState::initial(protocol.x0);
        let mut stepper = Stepper {
            model,
            protocol,
            state,
            records: Vec::with_capacity(capacity),
        };
        stepper.record()?;
        Ok(stepper)
    }

    fn record(&mut self) -> Result<ErrorSignal> {
        let e = self.protocol.error_for_trial(self.state)?;
        self.records.push(TrialRecord {
            n: self.state.n,
            x: self.state.x,
            e: e.value(),
            p: self.model.applied_rate(e),
        });
        Ok(e)
    }

    /// Advances one trial and returns `|x' - x|`.
    fn advance(&mut self) -> Result<f64> {
        let e = ErrorSignal::new(self.records.last().expect("seeded").e)?;
        let next = self.model.step(self.state, e);
        if !next.x.is_finite() || next.x.abs() > DIVERGENCE_LIMIT {
            return Err(Error::NumericOverflow {
                trial: next.n,
                x: next.x,
                limit: DIVERGENCE_LIMIT,
            });
        }
        let delta = (next.x - self.state.x).abs();
        self.state = next;
        self.record()?;
        Ok(delta)
    }

    fn finish(self) -> Trajectory {
        Trajectory {
            model: *self.model,
            protocol: *self.protocol,
            records: self.records,
        }
    }
}

/// Runs exactly `protocol.n_trials()` trials, producing `n_trials + 1` records.
pub fn simulate(model: &Model, protocol: &Protocol) -> Result<Trajectory> {
    let mut stepper = Stepper::new(model, protocol, protocol.n_trials + 1)?;
    for _ in 0..protocol.n_trials {
        stepper.advance()?;
    }
    Ok(stepper.finish())
}

/// Runs until `|x_{n+1} - x_n| < tol` or `n_max` trials. The protocol's own
/// trial count is ignored.
pub fn simulate_until_converged(
    model: &Model,
    paradigm: Paradigm,
    x0: f64,
    tol: f64,
    n_max: usize,
) -> Result<ConvergedRun> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let protocol = Protocol::new(paradigm, n_max.max(1), x0)?;
    let mut stepper = Stepper::new(model, &protocol, 64)?;
    let mut converged = false;
    for _ in 0..n_max {
        if stepper.advance()? < tol {
            converged = true;
            break;
        }
    }
    let mut trajectory = stepper.finish();
    trajectory.protocol.n_trials = trajectory.records.len() - 1;
    Ok(ConvergedRun {
        trajectory,
        converged,
    })
}
