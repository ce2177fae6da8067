use std::fmt::Write as _;
use std::fs::File;

use motor_adapt_core::analysis::{
    extract_features, falsification_report, feature_sweep, sweep, verify_uniqueness,
    FalsificationReport, SweepRow, UniquenessOptions,
};
use motor_adapt_core::fitting::{cross_model_comparison, fit, FitOptions, FitResult, ModelComparison};
use motor_adapt_core::io::{fmt_f64, read_family, residuals_to_csv, trajectory_to_csv};
use motor_adapt_core::report::{
    comparison_tree, falsification_tree, feature_sweep_tree, fit_result_tree, sweep_rows_tree,
    trajectory_tree, uniqueness_tree,
};
use motor_adapt_core::{simulate, Model};

use crate::config::{load_config, RunConfig};
use crate::{problem, write_atomic, Cli, CliError, Command, Format};

const UNIQUENESS_FAIL: u8 = 4;

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Simulate => cmd_simulate(cli),
        Command::Sweep { errors } => cmd_sweep(cli, errors.as_deref()),
        Command::Falsify { errors } => cmd_falsify(cli, errors.as_deref()),
        Command::Uniqueness { family, tol } => cmd_uniqueness(cli, family, *tol),
        Command::Fit {
            problem,
            starts,
            max_evals,
            compare,
        } => cmd_fit(cli, problem, *starts, *max_evals, *compare),
    }
}

fn config(cli: &Cli) -> Result<RunConfig, CliError> {
    load_config(cli.config.as_deref(), &cli.overrides)
}

/// Sends `text` to `--out` if given, otherwise to standard output.
fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Summary lines go to standard output, or standard error when the main
/// output already occupies standard output.
fn summary(cli: &Cli, text: &str) {
    if cli.out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
}

fn error_list(cli_list: Option<&str>, cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    match cli_list {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Input(format!("--errors: `{s}` is not a finite number")))
            })
            .collect(),
        None => Ok(cfg.errors.clone().unwrap_or_default()),
    }
}

fn cmd_simulate(cli: &Cli) -> Result<u8, CliError> {
    let cfg = config(cli)?;
    let model = cfg.model()?;
    let protocol = cfg.protocol()?;
    let opts = cfg.sweep_options()?;
    let traj = simulate(&model, &protocol)?;
    let features = extract_features(&traj, opts.conv_tol)?;
    let table = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => trajectory_to_csv(&traj),
        Format::KvTree => trajectory_tree(&traj).render(),
    };
    emit(cli, &table)?;
    summary(
        cli,
        &format!(
            "asymptote: {}\nslope: {}\nconverged: {}\n",
            fmt_f64(features.asymptote),
            fmt_f64(features.initial_slope),
            features.converged
        ),
    );
    Ok(0)
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("error,asymptote,slope,converged\n");
    for r in rows {
        let f = &r.features;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.error),
            fmt_f64(f.asymptote),
            fmt_f64(f.initial_slope),
            f.converged
        );
    }
    out
}

fn cmd_sweep(cli: &Cli, errors: Option<&str>) -> Result<u8, CliError> {
    let cfg = config(cli)?;
    let model = cfg.model()?;
    let opts = cfg.sweep_options()?;
    let errors = error_list(errors, &cfg)?;
    if errors.is_empty() {
        return Err(CliError::Input("errors: sweep needs at least one error size".into()));
    }
    let (rows, tree) = match &model {
        Model::Coupled(params) => {
            let s = feature_sweep(params, &errors, &opts)?;
            let tree = feature_sweep_tree(&s);
            (s.rows, tree)
        }
        Model::Standard(_) => {
            let rows = sweep(&model, &errors, &opts)?;
            let tree = sweep_rows_tree(&rows);
            (rows, tree)
        }
    };
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows),
        Format::KvTree => tree.render(),
    };
    emit(cli, &text)?;
    Ok(0)
}

fn falsify_csv(r: &FalsificationReport) -> String {
    let mut out = String::from("error,asymptote,slope,error_ratio,asymptote_ratio,slope_ratio\n");
    for row in &r.rows {
        let cells = [
            row.error,
            row.asymptote,
            row.slope,
            row.error_ratio,
            row.asymptote_ratio,
            row.slope_ratio,
        ];
        let cells: Vec<String> = cells.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn cmd_falsify(cli: &Cli, errors: Option<&str>) -> Result<u8, CliError> {
    let cfg = config(cli)?;
    let params = cfg.standard_model()?;
    let errors = error_list(errors, &cfg)?;
    let report = falsification_report(&params, &errors)
        .map_err(|e| CliError::Input(format!("errors: {e}")))?;
    let text = match cli.format.unwrap_or(Format::KvTree) {
        Format::Csv => falsify_csv(&report),
        Format::KvTree => falsification_tree(&report).render(),
    };
    emit(cli, &text)?;
    let violated: Vec<String> = report.violated().iter().map(u8::to_string).collect();
    summary(cli, &format!("violated: [{}]\n", violated.join(", ")));
    Ok(0)
}

fn cmd_uniqueness(cli: &Cli, family: &std::path::Path, tol: Option<f64>) -> Result<u8, CliError> {
    let cfg = config(cli)?;
    let tol = match tol {
        Some(t) if t.is_finite() && t > 0.0 => t,
        Some(t) => return Err(CliError::Input(format!("--tol: must be positive (got {t})"))),
        None => cfg.residual_tol()?,
    };
    let reader = File::open(family)
        .map_err(|e| CliError::Input(format!("cannot read family {}: {e}", family.display())))?;
    let family = read_family(reader)
        .map_err(|e| CliError::Input(format!("{}: {e}", family.display())))?;
    let verdict = verify_uniqueness(
        &family,
        &UniquenessOptions {
            tol,
            ..UniquenessOptions::default()
        },
    )?;
    let failing: Vec<String> = verdict
        .failing
        .iter()
        .map(|&i| fmt_f64(verdict.points[i].e))
        .collect();
    print!(
        "{}\nmax_residual: {}\nfailing_e: [{}]\n",
        if verdict.pass { "pass" } else { "fail" },
        fmt_f64(verdict.max_residual),
        failing.join(", ")
    );
    if let Some(path) = &cli.out {
        let text = match cli.format.unwrap_or(Format::Csv) {
            Format::Csv => residuals_to_csv(&verdict),
            Format::KvTree => uniqueness_tree(&verdict).render(),
        };
        write_atomic(path, &text)?;
    }
    Ok(if verdict.pass { 0 } else { UNIQUENESS_FAIL })
}

fn fit_csv(r: &FitResult) -> String {
    let mut out = String::from("parameter,value\n");
    for (name, v) in r.named_params() {
        let _ = writeln!(out, "{name},{}", fmt_f64(v));
    }
    let _ = writeln!(out, "objective,{}", fmt_f64(r.objective));
    out
}

fn comparison_csv(c: &ModelComparison) -> String {
    let mut out = String::from("model,parameter,value\n");
    for r in [&c.coupled, &c.standard] {
        for (name, v) in r.named_params() {
            let _ = writeln!(out, "{},{name},{}", r.kind, fmt_f64(v));
        }
        let _ = writeln!(out, "{},objective,{}", r.kind, fmt_f64(r.objective));
    }
    out
}

fn cmd_fit(
    cli: &Cli,
    path: &std::path::Path,
    starts: Option<usize>,
    max_evals: Option<usize>,
    compare: bool,
) -> Result<u8, CliError> {
    let loaded = problem::load(path)?;
    let defaults = FitOptions::default();
    let opts = FitOptions {
        starts: starts.or(loaded.file.starts).unwrap_or(defaults.starts),
        max_evals: max_evals.or(loaded.file.max_evals).unwrap_or(defaults.max_evals),
        seed: cli.seed.or(loaded.file.seed).unwrap_or(defaults.seed),
        ..defaults
    };
    let format = cli.format.unwrap_or(Format::KvTree);
    let text = if compare {
        let c = cross_model_comparison(&loaded.observed, &opts)?;
        for w in &c.warnings {
            eprintln!("warning: {w}");
        }
        match format {
            Format::Csv => comparison_csv(&c),
            Format::KvTree => comparison_tree(&c).render(),
        }
    } else {
        let problem = loaded.problem()?;
        let r = fit(&problem, &opts)?;
        for w in &r.warnings {
            eprintln!("warning: {w}");
        }
        match format {
            Format::Csv => fit_csv(&r),
            Format::KvTree => fit_result_tree(&r).render(),
        }
    };
    emit(cli, &text)?;
    Ok(0)
}
