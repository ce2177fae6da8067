//! Acceptance criteria. One PASS/FAIL line per criterion; exits non-zero if
//! any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use motor_adapt_core::analysis::{
    falsification_report, verify_uniqueness, FamilyPoint, GeneralLinearFamily, UniquenessOptions,
};
use motor_adapt_core::fitting::{
    cross_model_comparison, fit, synthetic_ticvf, FitOptions, FitProblem, ModelKind,
};
use motor_adapt_core::io::family_to_csv;
use motor_adapt_core::{
    simulate, simulate_until_converged, CoupledModelParams, ErrorSignal, Model, Paradigm, Protocol,
    RateFunction, StandardSsmParams,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn coupled_defaults() -> Model {
    CoupledModelParams::new(20.0, RateFunction::ramp(0.2, 7.5).unwrap())
        .unwrap()
        .into()
}

fn standard_defaults() -> Model {
    StandardSsmParams::new(0.9, 0.05).unwrap().into()
}

fn asymptote(model: &Model, e: f64, tol: f64) -> Result<f64, String> {
    let run = simulate_until_converged(model, Paradigm::Ticvf { e_clamp: e }, 0.0, tol, 10_000)
        .map_err(|err| err.to_string())?;
    if !run.converged {
        return Err(format!("clamp {e} did not converge"));
    }
    Ok(run.trajectory.final_x())
}

fn one_step_slope(model: &Model, e: f64) -> f64 {
    let t = simulate(model, &Protocol::ticvf(e, 1).unwrap()).unwrap();
    t.records[1].x - t.records[0].x
}

fn c1_asymptote_invariance() -> Outcome {
    let k = 20.0;
    let model = coupled_defaults();
    let mut xs = Vec::new();
    for e in [1.875, 3.75, 7.5, 15.0, 30.0, 45.0] {
        xs.push(asymptote(&model, e, 1e-9)?);
    }
    let worst = xs.iter().map(|x| (x - k).abs()).fold(0.0, f64::max);
    let spread = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
    check(
        worst < 1e-6 && spread < 1e-6,
        format!("max |X - k| = {worst:e}, spread = {spread:e}"),
    )
}

fn c2_standard_asymptote_proportional() -> Outcome {
    let (a, b) = (0.9, 0.05);
    let model = standard_defaults();
    // A step tolerance d leaves the state d a / (1 - a) short of the fixed
    // point, so 1e-13 puts the empirical asymptote within 1e-12 of it.
    let x10 = asymptote(&model, 10.0, 1e-13)?;
    let x20 = asymptote(&model, 20.0, 1e-13)?;
    let closed = |e: f64| b * e / (1.0 - a);
    let ratio = x20 / x10;
    let d10 = (x10 - closed(10.0)).abs();
    let d20 = (x20 - closed(20.0)).abs();
    check(
        (ratio - 2.0).abs() < 1e-9 && d10 < 1e-9 && d20 < 1e-9,
        format!("ratio = {ratio:?}, |X - closed form| = {d10:e}, {d20:e}"),
    )
}

fn c3_slope_regimes() -> Outcome {
    let model = coupled_defaults();
    let above: Vec<f64> = [7.5, 15.0, 30.0, 45.0].iter().map(|&e| one_step_slope(&model, e)).collect();
    let identical = above.iter().all(|s| s.to_bits() == above[0].to_bits());
    // p_max min(e / e_sat, 1) k by hand: 0.2 * 0.25 * 20, 0.2 * 0.5 * 20, 0.2 * 20.
    let below: Vec<f64> = [1.875, 3.75, 7.5].iter().map(|&e| one_step_slope(&model, e)).collect();
    let exact_ratios = below[1] / below[0] == 2.0 && below[2] / below[0] == 4.0;
    let hand = [1.0, 2.0, 4.0];
    let matches_hand = below.iter().zip(hand).all(|(s, h)| (s - h).abs() < 1e-15);
    check(
        identical && exact_ratios && matches_hand,
        format!("saturated slopes {above:?}, sub-saturation slopes {below:?}"),
    )
}

fn c4_standard_slope_falsified() -> Outcome {
    let model = standard_defaults();
    let s15 = one_step_slope(&model, 15.0);
    let s45 = one_step_slope(&model, 45.0);
    let ratio = s45 / s15;
    // One step from rest is b e: 0.75 and 2.25.
    let hand_gap = (s15 - 0.75).abs().max((s45 - 2.25).abs());
    let params = StandardSsmParams::new(0.9, 0.05).unwrap();
    let report = falsification_report(&params, &[15.0, 45.0]).map_err(|e| e.to_string())?;
    let violated = report.violated();
    check(
        (ratio - 3.0).abs() < 1e-12 && hand_gap < 1e-12 && violated == [1, 3],
        format!("slope ratio = {ratio:?}, violated features = {violated:?}"),
    )
}

fn c5_vmr_convergence() -> Outcome {
    let (k, target) = (20.0, 10.0);
    let rate = RateFunction::ramp(0.2, 7.5).unwrap();
    let model: Model = CoupledModelParams::new(k, rate).unwrap().into();
    let run = simulate_until_converged(&model, Paradigm::Vmr { target }, 0.0, 1e-9, 10_000)
        .map_err(|e| e.to_string())?;
    let errs: Vec<f64> = run.trajectory.records.iter().map(|r| r.e.abs()).collect();
    let final_err = (target - run.trajectory.final_x()).abs();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);

    // Independent loop: x' = x + P(e) (k - x), e = target - x.
    let mut x = 0.0f64;
    let mut replay_gap = 0.0f64;
    for r in &run.trajectory.records {
        replay_gap = replay_gap.max((r.x - x).abs());
        let e = target - x;
        let p = 0.2 * (e.abs() / 7.5).min(1.0);
        x = (1.0 - p) * x + p * k * e.signum();
    }

    let clamp = simulate(&model, &Protocol::ticvf(15.0, 200).unwrap()).unwrap();
    let geometric = clamp
        .records
        .iter()
        .map(|r| ((r.x - k).abs() - 0.8f64.powi(r.n as i32) * k).abs())
        .fold(0.0, f64::max);
    check(
        run.converged && final_err < 1e-6 && decreasing && replay_gap < 1e-12 && geometric < 1e-12,
        format!(
            "{} trials, final |error| = {final_err:e}, strictly decreasing = {decreasing}, \
             geometric identity gap = {geometric:e}",
            errs.len() - 1
        ),
    )
}

fn random_rate(rng: &mut ChaCha8Rng) -> RateFunction {
    if rng.random_bool(0.5) {
        RateFunction::ramp(rng.random_range(0.02..0.9), rng.random_range(1.0..20.0)).unwrap()
    } else {
        RateFunction::sigmoid(
            rng.random_range(0.2..5.0),
            rng.random_range(0.05..3.0),
            rng.random_range(0.1..3.0),
            rng.random_range(0.02..0.9),
        )
        .unwrap()
    }
}

fn c6_uniqueness() -> Outcome {
    let grid: Vec<f64> = (1..=50).map(|i| i as f64 * 0.9).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = UniquenessOptions::default();

    let mut worst_compliant = 0.0f64;
    let mut compliant_pass = true;
    for _ in 0..10 {
        let rate = random_rate(&mut rng);
        let k = rng.random_range(5.0..40.0);
        let points: Vec<FamilyPoint> = grid
            .iter()
            .map(|&e| {
                let p = rate.learning_rate(ErrorSignal::new(e).unwrap());
                FamilyPoint { e, f: 1.0 - p, g: p * k }
            })
            .collect();
        // Residual of f against 1 - g / k, computed here rather than by the library.
        let hand = points.iter().map(|q| (q.f - (1.0 - q.g / k)).abs()).fold(0.0, f64::max);
        let v = verify_uniqueness(&GeneralLinearFamily::new(points, k).unwrap(), &opts)
            .map_err(|e| e.to_string())?;
        worst_compliant = worst_compliant.max(hand).max(v.max_residual);
        compliant_pass &= v.pass;
    }

    let mut identified = 0;
    for _ in 0..100 {
        let rate = random_rate(&mut rng);
        let k = 20.0;
        let mut fam = GeneralLinearFamily::from_rate(&rate, &grid, k).unwrap();
        let at = rng.random_range(0..grid.len());
        let size = 10f64.powf(rng.random_range(-6.0..-2.0)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let point = &mut fam.points_mut()[at];
        if rng.random_bool(0.5) {
            point.f = (point.f + size).min(0.999_999);
        } else {
            point.g += size * k;
        }
        let v = verify_uniqueness(&fam, &opts).map_err(|e| e.to_string())?;
        if !v.pass && v.failing == [at] {
            identified += 1;
        }
    }
    check(
        compliant_pass && worst_compliant < 1e-12 && identified == 100,
        format!(
            "compliant max residual = {worst_compliant:e}, perturbed families failing at the \
             injected point: {identified}/100"
        ),
    )
}

fn c7_fitting() -> Outcome {
    let errors = [2.0, 6.0, 20.0];
    let mut recovered = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let truth = [
            rng.random_range(10.0..40.0),
            rng.random_range(0.05..0.5),
            rng.random_range(3.0..15.0),
        ];
        let model = ModelKind::CoupledRamp.build(&truth).unwrap();
        let data = synthetic_ticvf(&model, &errors, 60).unwrap();
        let problem = FitProblem::with_defaults(ModelKind::CoupledRamp, data).unwrap();
        let r = fit(&problem, &FitOptions { seed, ..Default::default() }).map_err(|e| e.to_string())?;
        if r.params.iter().zip(truth).all(|(p, t)| (p - t).abs() <= 0.01 * t) {
            recovered += 1;
        }
    }

    let data = synthetic_ticvf(&coupled_defaults(), &[15.0, 45.0], 60).unwrap();
    let cmp = cross_model_comparison(&data, &FitOptions::default()).map_err(|e| e.to_string())?;
    let (c, s) = (cmp.coupled.objective, cmp.standard.objective);
    check(
        recovered >= 95 && c < 1e-12 && s >= 100.0 * c,
        format!("recovered {recovered}/100 within 1%, coupled objective = {c:e}, standard = {s:e}"),
    )
}

struct Run {
    code: i32,
    stdout: Vec<u8>,
}

fn cli(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_motor-adapt"))
        .args(args)
        .output()
        .expect("cli binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
    }
}

fn c8_cli_contract() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let fam = GeneralLinearFamily::from_rate(
        &RateFunction::ramp(0.2, 7.5).unwrap(),
        &(1..=50).map(|i| i as f64 * 0.5).collect::<Vec<_>>(),
        20.0,
    )
    .unwrap();
    fs::write(p("family.csv"), family_to_csv(&fam)).unwrap();
    let mut bad = fam.clone();
    bad.points_mut()[10].f -= 1e-4;
    fs::write(p("perturbed.csv"), family_to_csv(&bad)).unwrap();
    fs::write(p("noncontractive.csv"), "k_ref,20.0\ne,f,g\n1.0,0.9,2.0\n2.0,1.05,3.0\n").unwrap();
    fs::write(p("bad.json"), r#"{"model": {"kind": "standard", "a": 1.2}}"#).unwrap();
    let problem = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/fit/problem.json");
    let problem = problem.to_str().unwrap();

    let family = p("family.csv");
    let deterministic: Vec<Vec<&str>> = vec![
        vec!["simulate"],
        vec!["--set", "protocol.kind=vmr", "--set", "protocol.target=10", "simulate"],
        vec!["sweep", "--errors", "1.875,3.75,7.5,15,30,45"],
        vec!["falsify", "--errors", "10,20"],
        vec!["uniqueness", "--family", &family],
        vec!["--seed", "3", "fit", "--problem", problem, "--starts", "4"],
    ];
    let mut mismatched = Vec::new();
    for (i, args) in deterministic.iter().enumerate() {
        let runs: Vec<(i32, Vec<u8>, Vec<u8>)> = (0..2)
            .map(|j| {
                let out = p(&format!("out_{i}_{j}"));
                let mut full = args.clone();
                full.extend(["--out", &out]);
                let r = cli(&full);
                (r.code, r.stdout, fs::read(&out).unwrap_or_default())
            })
            .collect();
        if runs[0] != runs[1] || runs[0].0 != 0 {
            mismatched.push(args[args.len() - 1].to_string());
        }
    }

    let expected: Vec<(Vec<String>, i32)> = vec![
        (vec!["simulate".into()], 0),
        (vec!["--config".into(), p("bad.json"), "simulate".into()], 2),
        (vec!["sweep".into(), "--errors".into(), "".into()], 2),
        (vec!["falsify".into(), "--errors".into(), "15".into()], 2),
        (vec!["fit".into(), "--problem".into(), p("missing.json")], 2),
        (
            ["--set", "model.kind=standard", "--set", "model.a=0.5", "--set", "model.b=5",
             "--set", "protocol.kind=vmr", "--set", "protocol.target=10", "simulate"]
                .map(String::from)
                .to_vec(),
            3,
        ),
        (vec!["uniqueness".into(), "--family".into(), p("noncontractive.csv")], 3),
        (vec!["uniqueness".into(), "--family".into(), family.clone()], 0),
        (vec!["uniqueness".into(), "--family".into(), p("perturbed.csv")], 4),
    ];
    let mut wrong_codes = Vec::new();
    for (args, code) in &expected {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let got = cli(&refs).code;
        if got != *code {
            wrong_codes.push(format!("{args:?}: {got} != {code}"));
        }
    }
    check(
        mismatched.is_empty() && wrong_codes.is_empty(),
        format!(
            "{} commands byte-identical on rerun, {}/{} exit codes as contracted{}",
            deterministic.len() - mismatched.len(),
            expected.len() - wrong_codes.len(),
            expected.len(),
            if wrong_codes.is_empty() && mismatched.is_empty() {
                String::new()
            } else {
                format!(" (nondeterministic: {mismatched:?}; wrong: {wrong_codes:?})")
            }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 coupled clamped-error asymptote equals k at every size", c1_asymptote_invariance),
        ("2 standard asymptote doubles with error, matches closed form", c2_standard_asymptote_proportional),
        ("3 slopes saturate above e_sat and scale below it", c3_slope_regimes),
        ("4 standard slope ratio 3 falsifies features 1 and 3", c4_standard_slope_falsified),
        ("5 rotation error shrinks to zero, clamped contraction is geometric", c5_vmr_convergence),
        ("6 only f = 1 - g / K families share one asymptote", c6_uniqueness),
        ("7 fitting recovers parameters and prefers the coupled model", c7_fitting),
        ("8 CLI output is deterministic and exit codes hold", c8_cli_contract),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (name, criterion) in criteria {
        let start = Instant::now();
        let outcome = criterion();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} [{ms} ms]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} [{ms} ms]: {detail}");
            }
        }
    }
    println!(
        "acceptance: {}/8 passed in {} ms",
        8 - failed,
        total.elapsed().as_millis()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
