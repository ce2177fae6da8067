//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export wraps a plain Rust function of the same name with an `_impl`
//! suffix, so the logic is testable natively.

use wasm_bindgen::prelude::*;

use motor_adapt_core::{
    simulate, CoupledModelParams, ErrorSignal, Model, Protocol, RateFunction, Result,
    StandardSsmParams,
};

fn coupled(k: f64, p_max: f64, e_sat: f64) -> Result<Model> {
    Ok(CoupledModelParams::new(k, RateFunction::ramp(p_max, e_sat)?)?.into())
}

fn states(model: &Model, protocol: &Protocol) -> Result<Vec<f64>> {
    Ok(simulate(model, protocol)?.xs().collect())
}

/// Clamped-error trajectories for each error size, both models, flattened as
/// `[coupled(e0), standard(e0), coupled(e1), ...]`, each `n_trials + 1` long.
pub fn ticvf_compare_impl(
    k: f64,
    p_max: f64,
    e_sat: f64,
    a: f64,
    b: f64,
    errors: &[f64],
    n_trials: usize,
) -> Result<Vec<f64>> {
    let coupled = coupled(k, p_max, e_sat)?;
    let standard: Model = StandardSsmParams::new(a, b)?.into();
    let mut out = Vec::with_capacity(2 * errors.len() * (n_trials + 1));
    for &e in errors {
        let protocol = Protocol::ticvf(e, n_trials)?;
        out.extend(states(&coupled, &protocol)?);
        out.extend(states(&standard, &protocol)?);
    }
    Ok(out)
}

/// `P(e)` of the ramp at `n` evenly spaced errors on `[0, e_max]`.
pub fn rate_curve_impl(p_max: f64, e_sat: f64, e_max: f64, n: usize) -> Result<Vec<f64>> {
    let rate = RateFunction::ramp(p_max, e_sat)?;
    let step = if n > 1 { e_max / (n - 1) as f64 } else { 0.0 };
    (0..n)
        .map(|i| Ok(rate.learning_rate(ErrorSignal::new(i as f64 * step)?)))
        .collect()
}

/// Coupled-model rotation adaptation: interleaved `[x0, e0, x1, e1, ...]`.
pub fn vmr_impl(k: f64, p_max: f64, e_sat: f64, target: f64, n_trials: usize) -> Result<Vec<f64>> {
    let traj = simulate(&coupled(k, p_max, e_sat)?, &Protocol::vmr(target, n_trials)?)?;
    Ok(traj.records.iter().flat_map(|r| [r.x, r.e]).collect())
}

#[wasm_bindgen]
pub fn ticvf_compare(
    k: f64,
    p_max: f64,
    e_sat: f64,
    a: f64,
    b: f64,
    errors: &[f64],
    n_trials: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    Ok(ticvf_compare_impl(k, p_max, e_sat, a, b, errors, n_trials)?)
}

#[wasm_bindgen]
pub fn rate_curve(p_max: f64, e_sat: f64, e_max: f64, n: usize) -> std::result::Result<Vec<f64>, JsError> {
    Ok(rate_curve_impl(p_max, e_sat, e_max, n)?)
}

#[wasm_bindgen]
pub fn vmr(k: f64, p_max: f64, e_sat: f64, target: f64, n_trials: usize) -> std::result::Result<Vec<f64>, JsError> {
    Ok(vmr_impl(k, p_max, e_sat, target, n_trials)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticvf_layout_and_values() {
        let out = ticvf_compare_impl(20.0, 0.2, 7.5, 0.9, 0.05, &[15.0, 30.0], 10).unwrap();
        assert_eq!(out.len(), 4 * 11);
        // Coupled first step 0.2 * 20; standard first step 0.05 * e.
        assert_eq!(out[1], 4.0);
        assert_eq!(out[11 + 1], 0.75);
        assert_eq!(out[22 + 1], 4.0);
        assert_eq!(out[33 + 1], 1.5);
    }

    #[test]
    fn rate_curve_saturates() {
        let p = rate_curve_impl(0.2, 7.5, 15.0, 5).unwrap();
        assert_eq!(p, vec![0.0, 0.1, 0.2, 0.2, 0.2]);
    }

    #[test]
    fn vmr_error_shrinks() {
        let out = vmr_impl(20.0, 0.2, 7.5, 10.0, 60).unwrap();
        assert_eq!(out.len(), 2 * 61);
        assert_eq!((out[0], out[1]), (0.0, 10.0));
        assert!(out[121].abs() < 1e-6);
    }

    #[test]
    fn invalid_parameters_are_errors() {
        assert!(ticvf_compare_impl(20.0, 1.5, 7.5, 0.9, 0.05, &[15.0], 10).is_err());
        assert!(rate_curve_impl(0.2, -1.0, 15.0, 5).is_err());
        assert!(vmr_impl(0.0, 0.2, 7.5, 10.0, 5).is_err());
    }
}
