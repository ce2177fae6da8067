//! Error-to-learning-rate maps.
//!
//! Both variants are evaluated on `|e|` and satisfy `P(0) = 0` exactly,
//! `0 <= P(e) < 1`, and are non-decreasing in `|e|`.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::model::ErrorSignal;

/// Saturation error of the ramp variant, in degrees.
pub const DEFAULT_E_SAT: f64 = 7.5;
pub const DEFAULT_P_MAX: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateFunction {
    /// `P(e) = p_max * min(|e| / e_sat, 1)`.
    Ramp { p_max: f64, e_sat: f64 },
    /// `a / (b + exp(-c|e|))` shifted to vanish at zero and rescaled so that
    /// its supremum is `p_max`.
    Sigmoid { a: f64, b: f64, c: f64, p_max: f64 },
}

impl Default for RateFunction {
    fn default() -> Self {
        RateFunction::Ramp {
            p_max: DEFAULT_P_MAX,
            e_sat: DEFAULT_E_SAT,
        }
    }
}

impl RateFunction {
    pub fn ramp(p_max: f64, e_sat: f64) -> Result<Self> {
        let rate = RateFunction::Ramp { p_max, e_sat };
        rate.validate()?;
        Ok(rate)
    }

    pub fn sigmoid(a: f64, b: f64, c: f64, p_max: f64) -> Result<Self> {
        let rate = RateFunction::Sigmoid { a, b, c, p_max };
        rate.validate()?;
        Ok(rate)
    }

    pub fn validate(&self) -> Result<()> {
        let p_max = match *self {
            RateFunction::Ramp { p_max, e_sat } => {
                check_finite("e_sat", e_sat)?;
                if e_sat <= 0.0 {
                    return Err(Error::InvalidParameters {
                        field: "e_sat",
                        value: e_sat,
                        reason: "saturation error must be positive",
                    });
                }
                p_max
            }
            RateFunction::Sigmoid { a, b, c, p_max } => {
                for (field, value) in [("a", a), ("b", b), ("c", c)] {
                    check_finite(field, value)?;
                    if value <= 0.0 {
                        return Err(Error::InvalidParameters {
                            field,
                            value,
                            reason: "sigmoid parameters must be positive",
                        });
                    }
                }
                p_max
            }
        };
        check_finite("p_max", p_max)?;
        if !(p_max > 0.0 && p_max < 1.0) {
            return Err(Error::InvalidParameters {
                field: "p_max",
                value: p_max,
                reason: "saturated rate must lie in (0, 1)",
            });
        }
        Ok(())
    }

    /// Supremum of `P` over all errors.
    pub fn p_max(&self) -> f64 {
        match *self {
            RateFunction::Ramp { p_max, .. } | RateFunction::Sigmoid { p_max, .. } => p_max,
        }
    }

    /// Error magnitude above which `P` is exactly constant, if any.
    pub fn saturation(&self) -> Option<f64> {
        match *self {
            RateFunction::Ramp { e_sat, .. } => Some(e_sat),
            RateFunction::Sigmoid { .. } => None,
        }
    }

    /// `P(|e|)`.
    pub fn learning_rate(&self, e: ErrorSignal) -> f64 {
        let magnitude = e.value().abs();
        if magnitude == 0.0 {
            return 0.0;
        }
        match *self {
            RateFunction::Ramp { p_max, e_sat } => p_max * (magnitude / e_sat).min(1.0),
            RateFunction::Sigmoid { a, b, c, p_max } => {
                let at_zero = a / (b + 1.0);
                let raw = a / (b + (-c * magnitude).exp()) - at_zero;
                let span = a / b - at_zero;
                // Rounding near the asymptote must not reach p_max.
                (p_max * raw / span).clamp(0.0, p_max * (1.0 - f64::EPSILON))
            }
        }
    }
}

/// Free-function form of [`RateFunction::learning_rate`] that also checks
/// the parameters.
pub fn learning_rate(rate: &RateFunction, e: ErrorSignal) -> Result<f64> {
    rate.validate()?;
    Ok(rate.learning_rate(e))
}
