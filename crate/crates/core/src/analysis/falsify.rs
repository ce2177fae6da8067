//! Checks the standard model's closed-form predictions against the three
//! clamped-feedback features.

use crate::error::{Error, Result};
use crate::model::{fixed_point_standard, ErrorSignal, StandardSsmParams};

/// Error size separating the small-error and large-error slope regimes, in degrees.
pub const FEATURE_BOUNDARY: f64 = 7.5;

/// Relative tolerance for treating two ratios as equal.
pub const RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureVerdict {
    /// The model's prediction contradicts the observed feature.
    Violated,
    Consistent,
    /// Not enough error sizes on the relevant side of the boundary.
    Untested,
}

impl FeatureVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureVerdict::Violated => "violated",
            FeatureVerdict::Consistent => "consistent",
            FeatureVerdict::Untested => "untested",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalsificationRow {
    pub error: f64,
    /// `B e / (1 - A)`.
    pub asymptote: f64,
    /// `B e`, the first step from `x_0 = 0`.
    pub slope: f64,
    /// Ratios relative to the first error size.
    pub error_ratio: f64,
    pub asymptote_ratio: f64,
    pub slope_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalsificationReport {
    pub params: StandardSsmParams,
    pub boundary: f64,
    pub rows: Vec<FalsificationRow>,
    /// Asymptote ratio equals error ratio for every size.
    pub asymptote_proportional: bool,
    /// Slope ratio equals error ratio for every size.
    pub slope_proportional: bool,
    /// Saturation level independent of error size.
    pub feature1: FeatureVerdict,
    /// Initial slope depends on error size below the boundary.
    pub feature2: FeatureVerdict,
    /// Initial slope independent of error size at or above the boundary.
    pub feature3: FeatureVerdict,
}

impl FalsificationReport {
    pub fn violated(&self) -> Vec<u8> {
        [(1, self.feature1), (2, self.feature2), (3, self.feature3)]
            .into_iter()
            .filter(|(_, v)| *v == FeatureVerdict::Violated)
            .map(|(i, _)| i)
            .collect()
    }
}

fn ratio_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= RATIO_TOL * a.abs().max(b.abs())
}

pub fn falsification_report(
    params: &StandardSsmParams,
    error_sizes: &[f64],
) -> Result<FalsificationReport> {
    if error_sizes.len() < 2 {
        return Err(Error::InvalidInput(
            "falsification needs at least two error sizes".into(),
        ));
    }
    if let Some(&bad) = error_sizes.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "error sizes must be positive and finite, got {bad}"
        )));
    }
    for (i, a) in error_sizes.iter().enumerate() {
        if error_sizes[..i].contains(a) {
            return Err(Error::InvalidInput(format!(
                "error sizes must be distinct, {a} repeats"
            )));
        }
    }

    let e0 = error_sizes[0];
    let a0 = fixed_point_standard(params, ErrorSignal::new(e0)?);
    let s0 = params.gain() * e0;
    let rows: Vec<FalsificationRow> = error_sizes
        .iter()
        .map(|&error| {
            let asymptote = fixed_point_standard(params, ErrorSignal::new(error)?);
            let slope = params.gain() * error;
            Ok(FalsificationRow {
                error,
                asymptote,
                slope,
                error_ratio: error / e0,
                asymptote_ratio: asymptote / a0,
                slope_ratio: slope / s0,
            })
        })
        .collect::<Result<_>>()?;

    let asymptote_proportional = rows.iter().all(|r| ratio_eq(r.asymptote_ratio, r.error_ratio));
    let slope_proportional = rows.iter().all(|r| ratio_eq(r.slope_ratio, r.error_ratio));

    // Asymptotes that differ across sizes contradict feature 1.
    let feature1 = if rows.iter().any(|r| !ratio_eq(r.asymptote, a0)) {
        FeatureVerdict::Violated
    } else {
        FeatureVerdict::Consistent
    };

    let slopes_vary = |side: &[&FalsificationRow]| -> Option<bool> {
        (side.len() >= 2).then(|| side.iter().any(|r| !ratio_eq(r.slope, side[0].slope)))
    };
    let below: Vec<&FalsificationRow> =
        rows.iter().filter(|r| r.error < FEATURE_BOUNDARY).collect();
    let above: Vec<&FalsificationRow> =
        rows.iter().filter(|r| r.error >= FEATURE_BOUNDARY).collect();
    let feature2 = match slopes_vary(&below) {
        None => FeatureVerdict::Untested,
        Some(true) => FeatureVerdict::Consistent,
        Some(false) => FeatureVerdict::Violated,
    };
    let feature3 = match slopes_vary(&above) {
        None => FeatureVerdict::Untested,
        Some(true) => FeatureVerdict::Violated,
        Some(false) => FeatureVerdict::Consistent,
    };

    Ok(FalsificationReport {
        params: *params,
        boundary: FEATURE_BOUNDARY,
        rows,
        asymptote_proportional,
        slope_proportional,
        feature1,
        feature2,
        feature3,
    })
}
