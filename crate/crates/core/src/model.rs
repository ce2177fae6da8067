//! The two update rules and their closed-form fixed points.

use crate::error::{check_finite, Error, Result};
use crate::rate::RateFunction;

pub const DEFAULT_RETENTION: f64 = 0.9;
pub const DEFAULT_ERROR_GAIN: f64 = 0.05;
pub const DEFAULT_DRIVE: f64 = 20.0;

/// Signed error on a trial, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ErrorSignal(f64);

impl ErrorSignal {
    pub const ZERO: ErrorSignal = ErrorSignal(0.0);

    pub fn new(e: f64) -> Result<Self> {
        check_finite("error", e)?;
        Ok(ErrorSignal(e))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialState {
    pub n: usize,
    pub x: f64,
}

impl TrialState {
    pub fn initial(x: f64) -> Self {
        TrialState { n: 0, x }
    }

    fn next(self, x: f64) -> Self {
        TrialState { n: self.n + 1, x }
    }
}

/// `x' = A x + B e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardSsmParams {
    retention: f64,
    gain: f64,
}

impl Default for StandardSsmParams {
    fn default() -> Self {
        StandardSsmParams {
            retention: DEFAULT_RETENTION,
            gain: DEFAULT_ERROR_GAIN,
        }
    }
}

impl StandardSsmParams {
    pub fn new(retention: f64, gain: f64) -> Result<Self> {
        check_finite("a", retention)?;
        check_finite("b", gain)?;
        if !(retention > 0.0 && retention < 1.0) {
            return Err(Error::InvalidParameters {
                field: "a",
                value: retention,
                reason: "retention A must satisfy 0 < A < 1",
            });
        }
        if gain <= 0.0 {
            return Err(Error::InvalidParameters {
                field: "b",
                value: gain,
                reason: "error gain B must be positive",
            });
        }
        if !(gain / (1.0 - retention)).is_finite() {
            return Err(Error::InvalidParameters {
                field: "b",
                value: gain,
                reason: "B/(1-A) must be finite",
            });
        }
        Ok(StandardSsmParams { retention, gain })
    }

    pub fn retention(&self) -> f64 {
        self.retention
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }
}

/// `x' = (1 - P(e)) x + P(e) K` with `K = sign(e) k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledModelParams {
    drive: f64,
    rate: RateFunction,
}

impl Default for CoupledModelParams {
    fn default() -> Self {
        CoupledModelParams {
            drive: DEFAULT_DRIVE,
            rate: RateFunction::default(),
        }
    }
}

impl CoupledModelParams {
    pub fn new(drive: f64, rate: RateFunction) -> Result<Self> {
        check_finite("k", drive)?;
        if drive <= 0.0 {
            return Err(Error::InvalidParameters {
                field: "k",
                value: drive,
                reason: "drive magnitude k must be positive",
            });
        }
        rate.validate()?;
        Ok(CoupledModelParams { drive, rate })
    }

    /// Magnitude `k` of the drive target.
    pub fn drive(&self) -> f64 {
        self.drive
    }

    pub fn rate(&self) -> &RateFunction {
        &self.rate
    }
}

/// `+k`, `-k` or `0` by the sign of `e`. Zero is tested exactly.
pub fn drive_target(params: &CoupledModelParams, e: ErrorSignal) -> f64 {
    let e = e.value();
    if e > 0.0 {
        params.drive
    } else if e < 0.0 {
        -params.drive
    } else {
        0.0
    }
}

pub fn step_standard(params: &StandardSsmParams, s: TrialState, e: ErrorSignal) -> TrialState {
    s.next(params.retention * s.x + params.gain * e.value())
}

pub fn step_coupled(params: &CoupledModelParams, s: TrialState, e: ErrorSignal) -> TrialState {
    let p = params.rate.learning_rate(e);
    if p == 0.0 {
        return s.next(s.x);
    }
    s.next((1.0 - p) * s.x + p * drive_target(params, e))
}

/// `B e / (1 - A)`.
pub fn fixed_point_standard(params: &StandardSsmParams, e_clamped: ErrorSignal) -> f64 {
    params.gain * e_clamped.value() / (1.0 - params.retention)
}

/// `K` for any nonzero clamp; undefined at zero error where every state is fixed.
pub fn fixed_point_coupled(params: &CoupledModelParams, e_clamped: ErrorSignal) -> Result<f64> {
    if e_clamped.value() == 0.0 || params.rate.learning_rate(e_clamped) == 0.0 {
        return Err(Error::UndefinedFixedPoint);
    }
    Ok(drive_target(params, e_clamped))
}

/// Either update rule, as consumed by simulation and fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Standard(StandardSsmParams),
    Coupled(CoupledModelParams),
}

impl Model {
    pub fn step(&self, s: TrialState, e: ErrorSignal) -> TrialState {
        match self {
            Model::Standard(p) => step_standard(p, s, e),
            Model::Coupled(p) => step_coupled(p, s, e),
        }
    }

    /// Rate recorded alongside each trial: `P(e)` for the coupled model and
    /// the error-independent forgetting rate `1 - A` for the standard one.
    pub fn applied_rate(&self, e: ErrorSignal) -> f64 {
        match self {
            Model::Standard(p) => 1.0 - p.retention,
            Model::Coupled(p) => p.rate.learning_rate(e),
        }
    }

    pub fn fixed_point(&self, e_clamped: ErrorSignal) -> Result<f64> {
        match self {
            Model::Standard(p) => Ok(fixed_point_standard(p, e_clamped)),
            Model::Coupled(p) => fixed_point_coupled(p, e_clamped),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::Standard(_) => "standard",
            Model::Coupled(_) => "coupled",
        }
    }
}

impl From<StandardSsmParams> for Model {
    fn from(p: StandardSsmParams) -> Self {
        Model::Standard(p)
    }
}

impl From<CoupledModelParams> for Model {
    fn from(p: CoupledModelParams) -> Self {
        Model::Coupled(p)
    }
}
