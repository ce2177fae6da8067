use crate::error::{Error, Result};
use crate::model::{CoupledModelParams, Model};
use crate::paradigm::{simulate_until_converged, Paradigm, Trajectory};

/// Absolute tolerance, in degrees, for treating two asymptotes as equal.
pub const DEFAULT_ASYMPTOTE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureReport {
    /// Final state of the trajectory. Only an asymptote when `converged`.
    pub asymptote: f64,
    /// `x_1 - x_0`.
    pub initial_slope: f64,
    pub converged: bool,
}

pub fn extract_features(traj: &Trajectory, conv_tol: f64) -> Result<FeatureReport> {
    let [first, second, ..] = traj.records.as_slice() else {
        return Err(Error::InvalidInput(
            "feature extraction needs at least two records".into(),
        ));
    };
    let converged = traj.last_step().is_some_and(|d| d < conv_tol);
    Ok(FeatureReport {
        asymptote: traj.final_x(),
        initial_slope: second.x - first.x,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub x0: f64,
    pub conv_tol: f64,
    pub n_max: usize,
    pub asymptote_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            x0: 0.0,
            conv_tol: crate::paradigm::DEFAULT_CONV_TOL,
            n_max: crate::paradigm::DEFAULT_MAX_TRIALS,
            asymptote_tol: DEFAULT_ASYMPTOTE_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub error: f64,
    pub features: FeatureReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSweep {
    pub rows: Vec<SweepRow>,
    /// Every asymptote lies within `asymptote_tol` of the first.
    pub asymptotes_equal: bool,
    /// Slopes at sizes at or above saturation are bit-identical. `None` when
    /// fewer than two such sizes were swept or the model has no exact
    /// saturation point.
    pub saturated_slopes_equal: Option<bool>,
    /// Slopes strictly increase with size below saturation.
    pub subsaturation_slopes_increasing: Option<bool>,
}

/// Runs each clamped error to convergence and tabulates its features.
pub fn sweep(model: &Model, error_sizes: &[f64], opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    if error_sizes.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one error size".into()));
    }
    error_sizes
        .iter()
        .map(|&error| {
            let run = simulate_until_converged(
                model,
                Paradigm::Ticvf { e_clamp: error },
                opts.x0,
                opts.conv_tol,
                opts.n_max,
            )?;
            let features = extract_features(&run.trajectory, opts.conv_tol)?;
            Ok(SweepRow {
                error,
                features: FeatureReport {
                    converged: run.converged,
                    ..features
                },
            })
        })
        .collect()
}

/// Coupled-model sweep with the three TICVF feature checks.
pub fn feature_sweep(
    model: &CoupledModelParams,
    error_sizes: &[f64],
    opts: &SweepOptions,
) -> Result<FeatureSweep> {
    if let Some(&bad) = error_sizes.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "error sizes must be positive, got {bad}"
        )));
    }
    let rows = sweep(&Model::Coupled(*model), error_sizes, opts)?;

    let first = rows[0].features.asymptote;
    let asymptotes_equal = rows
        .iter()
        .all(|r| r.features.converged && (r.features.asymptote - first).abs() <= opts.asymptote_tol);

    let (mut saturated, mut below): (Vec<&SweepRow>, Vec<&SweepRow>) = (vec![], vec![]);
    if let Some(e_sat) = model.rate().saturation() {
        for row in &rows {
            if row.error >= e_sat {
                saturated.push(row);
            } else {
                below.push(row);
            }
        }
    }
    let saturated_slopes_equal = (saturated.len() >= 2).then(|| {
        let s0 = saturated[0].features.initial_slope;
        saturated.iter().all(|r| r.features.initial_slope.to_bits() == s0.to_bits())
    });
    let subsaturation_slopes_increasing = (below.len() >= 2).then(|| {
        below.sort_by(|a, b| a.error.total_cmp(&b.error));
        below.windows(2).all(|w| {
            w[0].error == w[1].error || w[1].features.initial_slope > w[0].features.initial_slope
        })
    });

    Ok(FeatureSweep {
        rows,
        asymptotes_equal,
        saturated_slopes_equal,
        subsaturation_slopes_increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paradigm::{simulate, Protocol};
    use crate::rate::RateFunction;

    fn coupled() -> CoupledModelParams {
        CoupledModelParams::new(20.0, RateFunction::ramp(0.2, 7.5).unwrap()).unwrap()
    }

    #[test]
    fn extract_from_converged_run() {
        let opts = SweepOptions::default();
        let rows = sweep(&coupled().into(), &[15.0, 45.0, 3.75], &opts).unwrap();
        let slopes: Vec<f64> = rows.iter().map(|r| r.features.initial_slope).collect();
        assert_eq!(slopes, vec![4.0, 4.0, 2.0]);
        for r in &rows {
            assert!(r.features.converged);
            assert!((r.features.asymptote - 20.0).abs() < 1e-6);
        }
    }

    #[test]
    fn slope_is_exactly_first_difference() {
        let traj = simulate(
            &coupled().into(),
            &Protocol::ticvf(5.0, 4).unwrap().with_x0(1.5).unwrap(),
        )
        .unwrap();
        let f = extract_features(&traj, 1e-9).unwrap();
        assert_eq!(f.initial_slope, traj.records[1].x - traj.records[0].x);
        assert!(!f.converged);
    }

    #[test]
    fn needs_two_records() {
        let mut traj = simulate(&coupled().into(), &Protocol::ticvf(5.0, 1).unwrap()).unwrap();
        traj.records.truncate(1);
        assert!(extract_features(&traj, 1e-9).is_err());
    }

    #[test]
    fn feature_sweep_examples() {
        let opts = SweepOptions::default();
        let s = feature_sweep(&coupled(), &[7.5, 15.0, 30.0, 45.0], &opts).unwrap();
        assert!(s.asymptotes_equal);
        assert_eq!(s.saturated_slopes_equal, Some(true));
        assert!(s.rows.iter().all(|r| r.features.initial_slope == 4.0));

        let s = feature_sweep(&coupled(), &[1.875, 3.75, 7.5], &opts).unwrap();
        let slopes: Vec<f64> = s.rows.iter().map(|r| r.features.initial_slope).collect();
        assert_eq!(slopes, vec![1.0, 2.0, 4.0]);
        assert_eq!(s.subsaturation_slopes_increasing, Some(true));

        let s = feature_sweep(&coupled(), &[15.0], &opts).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert!((s.rows[0].features.asymptote - 20.0).abs() < 1e-6);
        assert_eq!(s.saturated_slopes_equal, None);

        assert!(feature_sweep(&coupled(), &[15.0, -1.0], &opts).is_err());
    }
}
