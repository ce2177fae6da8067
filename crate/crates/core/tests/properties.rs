use motor_adapt_core::analysis::{
    verify_uniqueness, FamilyPoint, GeneralLinearFamily, UniquenessOptions,
};
use motor_adapt_core::fitting::{fit, objective, synthetic_ticvf, FitOptions, FitProblem, ModelKind};
use motor_adapt_core::{
    drive_target, fixed_point_standard, simulate, simulate_until_converged, step_coupled,
    CoupledModelParams, ErrorSignal, Model, Paradigm, Protocol, RateFunction, StandardSsmParams,
    TrialState,
};
use proptest::prelude::*;

fn ramp_model() -> impl Strategy<Value = CoupledModelParams> {
    (1.0f64..60.0, 0.01f64..0.95, 0.5f64..20.0).prop_map(|(k, p, s)| {
        CoupledModelParams::new(k, RateFunction::ramp(p, s).unwrap()).unwrap()
    })
}

fn sigmoid_model() -> impl Strategy<Value = CoupledModelParams> {
    (1.0f64..60.0, 0.01f64..0.95, 0.1f64..5.0, 0.05f64..3.0, 0.1f64..5.0).prop_map(
        |(k, p, a, b, c)| CoupledModelParams::new(k, RateFunction::sigmoid(a, b, c, p).unwrap()).unwrap(),
    )
}

fn any_coupled() -> impl Strategy<Value = CoupledModelParams> {
    prop_oneof![ramp_model(), sigmoid_model()]
}

fn err(v: f64) -> ErrorSignal {
    ErrorSignal::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rate_is_even_monotone_and_bounded(params in any_coupled()) {
        let rate = params.rate();
        let mut prev = 0.0;
        for i in 0..=2000 {
            let e = i as f64 * 0.05;
            let p = rate.learning_rate(err(e));
            prop_assert_eq!(p, rate.learning_rate(err(-e)));
            prop_assert!((0.0..1.0).contains(&p));
            prop_assert!(p >= prev);
            prev = p;
        }
        prop_assert_eq!(rate.learning_rate(err(0.0)), 0.0);
    }

    #[test]
    fn clamped_iteration_contracts_geometrically(
        params in any_coupled(), e in prop_oneof![0.1f64..60.0, -60.0f64..-0.1], x0 in -40.0f64..40.0,
    ) {
        let k = drive_target(&params, err(e));
        let shrink = 1.0 - params.rate().learning_rate(err(e));
        let mut s = TrialState::initial(x0);
        for n in 1..=200 {
            s = step_coupled(&params, s, err(e));
            let predicted = shrink.powi(n) * (x0 - k).abs();
            prop_assert!(((s.x - k).abs() - predicted).abs() <= 1e-12 * (x0 - k).abs().max(1.0) * n as f64);
        }
    }

    #[test]
    fn ticvf_is_monotone_without_overshoot(params in any_coupled(), e in 0.1f64..60.0) {
        let traj = simulate(&params.into(), &Protocol::ticvf(e, 300).unwrap()).unwrap();
        let k = params.drive();
        // Rounding of (1 - P) x + P k can land an ulp either side once x is at k.
        let ulps = 4.0 * f64::EPSILON * k;
        for w in traj.records.windows(2) {
            prop_assert!(w[1].x >= w[0].x - ulps);
            prop_assert!(w[1].x <= k + ulps);
        }
    }

    #[test]
    fn saturated_trajectories_are_identical(params in ramp_model(), scale in 1.0f64..10.0, x0 in -10.0f64..10.0) {
        let e_sat = params.rate().saturation().unwrap();
        let base = simulate(&params.into(), &Protocol::ticvf(e_sat, 100).unwrap().with_x0(x0).unwrap()).unwrap();
        let other = simulate(&params.into(), &Protocol::ticvf(e_sat * scale, 100).unwrap().with_x0(x0).unwrap()).unwrap();
        prop_assert!(base.xs().eq(other.xs()));
    }

    #[test]
    fn one_step_slope_is_rate_times_drive(params in ramp_model(), e in 0.01f64..60.0) {
        let traj = simulate(&params.into(), &Protocol::ticvf(e, 1).unwrap()).unwrap();
        let slope = traj.records[1].x - traj.records[0].x;
        prop_assert_eq!(slope, params.rate().learning_rate(err(e)) * params.drive());
    }

    #[test]
    fn coupled_asymptote_is_drive(params in any_coupled(), e in 0.5f64..60.0) {
        let run = simulate_until_converged(&params.into(), Paradigm::Ticvf { e_clamp: e }, 0.0, 1e-12, 100_000).unwrap();
        prop_assert!(run.converged);
        prop_assert!((run.trajectory.final_x() - params.drive()).abs() < 1e-6);
    }

    #[test]
    fn zero_error_step_is_identity(params in any_coupled(), x in -1e6f64..1e6) {
        let s = step_coupled(&params, TrialState { n: 4, x }, err(0.0));
        prop_assert_eq!(s.x.to_bits(), x.to_bits());
        prop_assert_eq!(s.n, 5);
    }

    #[test]
    fn washout_separates_the_models(params in any_coupled(), a in 0.05f64..0.99, x0 in 0.5f64..30.0) {
        let held = simulate(&params.into(), &Protocol::washout(50, x0).unwrap()).unwrap();
        prop_assert!(held.xs().all(|x| x == x0));
        let std: Model = StandardSsmParams::new(a, 0.05).unwrap().into();
        let decayed = simulate(&std, &Protocol::washout(50, x0).unwrap()).unwrap();
        for w in decayed.records.windows(2) {
            prop_assert!(w[1].x < w[0].x);
        }
    }

    /// Monotone shrinkage needs `P(e) (k - T + e) <= e` on `(0, T]`; for the
    /// ramp the left side over `e` peaks at `e = min(T, e_sat)`.
    #[test]
    fn vmr_error_shrinks_every_trial(params in ramp_model(), frac in 0.05f64..0.95) {
        let target = frac * params.drive();
        let (k, p_max, e_sat) = match *params.rate() {
            RateFunction::Ramp { p_max, e_sat } => (params.drive(), p_max, e_sat),
            _ => unreachable!(),
        };
        prop_assume!(p_max / e_sat * (k - target + target.min(e_sat)) <= 1.0);
        let run = simulate_until_converged(&params.into(), Paradigm::Vmr { target }, 0.0, 1e-9, 200_000).unwrap();
        let errs: Vec<f64> = run.trajectory.records.iter().map(|r| r.e.abs()).collect();
        for w in errs.windows(2) {
            if w[0] < 1e-9 {
                break;
            }
            prop_assert!(w[1] < w[0], "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn standard_iteration_reaches_closed_form(a in 0.05f64..0.98, b in 0.001f64..1.0, e in -60.0f64..60.0) {
        let params = StandardSsmParams::new(a, b).unwrap();
        let mut x = 0.0;
        for _ in 0..10_000 {
            x = a * x + b * e;
        }
        let closed = fixed_point_standard(&params, err(e));
        prop_assert!((x - closed).abs() <= 1e-9 * closed.abs().max(1.0));
    }

    #[test]
    fn standard_asymptote_scales_with_error(a in 0.05f64..0.95, b in 0.001f64..1.0, e1 in 0.5f64..60.0, e2 in 0.5f64..60.0) {
        let model: Model = StandardSsmParams::new(a, b).unwrap().into();
        let asym = |e| simulate_until_converged(&model, Paradigm::Ticvf { e_clamp: e }, 0.0, 1e-13, 100_000)
            .unwrap()
            .trajectory
            .final_x();
        let gain = b / (1.0 - a);
        prop_assert!((asym(e1) / e1 - gain).abs() <= 1e-9 * gain);
        prop_assert!((asym(e2) / e2 - gain).abs() <= 1e-9 * gain);
    }

    #[test]
    fn simulation_replays_bit_identically(params in any_coupled(), target in -30.0f64..30.0) {
        let p = Protocol::vmr(target, 80).unwrap();
        prop_assert_eq!(simulate(&params.into(), &p).unwrap(), simulate(&params.into(), &p).unwrap());
    }

    #[test]
    fn compliant_families_pass(
        gs in proptest::collection::vec(0.001f64..0.99, 5..60),
        k in prop_oneof![1.0f64..50.0, -50.0f64..-1.0],
    ) {
        let points = gs.iter().enumerate().map(|(i, &p)| FamilyPoint { e: i as f64, f: 1.0 - p, g: p * k }).collect();
        let fam = GeneralLinearFamily::new(points, k).unwrap();
        let v = verify_uniqueness(&fam, &UniquenessOptions::default()).unwrap();
        prop_assert!(v.pass);
        prop_assert!(v.directions_agree);
    }

    #[test]
    fn perturbed_families_fail_at_the_perturbation(
        gs in proptest::collection::vec(0.01f64..0.9, 5..60),
        pick in any::<prop::sample::Index>(),
        jitter in 10.0f64..1e6,
        sign in any::<bool>(),
    ) {
        let tol = 1e-9;
        let k = 20.0;
        let mut points: Vec<FamilyPoint> = gs.iter().enumerate()
            .map(|(i, &p)| FamilyPoint { e: i as f64, f: 1.0 - p, g: p * k }).collect();
        let at = pick.index(points.len());
        let delta = jitter * tol * if sign { 1.0 } else { -1.0 };
        points[at].f += delta;
        let fam = GeneralLinearFamily::new(points, k).unwrap();
        let v = verify_uniqueness(&fam, &UniquenessOptions { tol, ..Default::default() }).unwrap();
        prop_assert!(!v.pass);
        prop_assert_eq!(v.failing, vec![at]);
        prop_assert!(v.directions_agree);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn objective_ignores_trajectory_order(
        params in ramp_model(),
        errors in proptest::collection::vec(0.5f64..40.0, 2..5),
        cand in (1.0f64..59.0, 0.01f64..0.9, 0.3f64..29.0),
    ) {
        let data = synthetic_ticvf(&params.into(), &errors, 30).unwrap();
        let mut reversed = data.clone();
        reversed.reverse();
        let p1 = FitProblem::with_defaults(ModelKind::CoupledRamp, data).unwrap();
        let p2 = FitProblem::with_defaults(ModelKind::CoupledRamp, reversed).unwrap();
        let c = [cand.0, cand.1, cand.2];
        prop_assert_eq!(objective(&p1, &c).unwrap(), objective(&p2, &c).unwrap());
    }

    #[test]
    fn more_starts_never_worsen_the_best(params in ramp_model(), seed in any::<u64>()) {
        let data = synthetic_ticvf(&params.into(), &[2.0, 6.0, 25.0], 30).unwrap();
        let problem = FitProblem::with_defaults(ModelKind::CoupledRamp, data).unwrap();
        let mut prev = f64::INFINITY;
        for starts in 1..=4 {
            let r = fit(&problem, &FitOptions { starts, seed, max_evals: 300, ..Default::default() }).unwrap();
            prop_assert!(r.objective <= prev);
            prev = r.objective;
        }
    }
}

#[test]
fn vmr_oscillates_when_gain_is_too_high() {
    // Slope p_max / e_sat = 1.8 per degree against a gap k - T = 10 overshoots
    // the target: the error changes sign and grows.
    let params = CoupledModelParams::new(20.0, RateFunction::ramp(0.9, 0.5).unwrap()).unwrap();
    let traj = simulate(&params.into(), &Protocol::vmr(10.0, 20).unwrap()).unwrap();
    let errs: Vec<f64> = traj.records.iter().map(|r| r.e).collect();
    assert!(errs.iter().any(|e| *e < 0.0));
    assert!(errs.windows(2).any(|w| w[1].abs() > w[0].abs()));
}
