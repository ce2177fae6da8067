//! Key-value tree text for reports.
//!
//! ```text
//! report: falsification
//! model:
//!   a: 0.9
//!   b: 0.05
//! ```
//!
//! Nested nodes indent by two spaces. Output order is insertion order, so the
//! same report always renders to the same bytes.

use std::fmt::Write as _;

use crate::analysis::{FalsificationReport, FeatureSweep, SweepRow, UniquenessVerdict};
use crate::fitting::{FitProblem, FitResult, ModelComparison};
use crate::io::fmt_f64;
use crate::model::Model;
use crate::paradigm::{Paradigm, Protocol, Trajectory};
use crate::rate::RateFunction;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KvTree {
    entries: Vec<(String, KvValue)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KvValue {
    Leaf(String),
    Node(KvTree),
}

impl KvTree {
    pub fn new() -> Self {
        KvTree::default()
    }

    pub fn text(mut self, key: &str, value: impl Into<String>) -> Self {
        self.entries.push((key.to_string(), KvValue::Leaf(value.into())));
        self
    }

    pub fn num(self, key: &str, value: f64) -> Self {
        self.text(key, fmt_f64(value))
    }

    pub fn int(self, key: &str, value: usize) -> Self {
        self.text(key, value.to_string())
    }

    pub fn flag(self, key: &str, value: bool) -> Self {
        self.text(key, value.to_string())
    }

    pub fn nums(self, key: &str, values: &[f64]) -> Self {
        let joined: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
        self.text(key, format!("[{}]", joined.join(", ")))
    }

    pub fn child(mut self, key: &str, node: KvTree) -> Self {
        self.entries.push((key.to_string(), KvValue::Node(node)));
        self
    }

    pub fn get(&self, key: &str) -> Option<&KvValue> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Looks up a dotted path such as `model.a`.
    pub fn leaf(&self, path: &str) -> Option<&str> {
        let mut node = self;
        let mut parts = path.split('.').peekable();
        while let Some(part) = parts.next() {
            match (node.get(part)?, parts.peek()) {
                (KvValue::Leaf(v), None) => return Some(v),
                (KvValue::Node(n), Some(_)) => node = n,
                _ => return None,
            }
        }
        None
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        for (key, value) in &self.entries {
            let pad = "  ".repeat(depth);
            match value {
                KvValue::Leaf(v) => {
                    let _ = writeln!(out, "{pad}{key}: {v}");
                }
                KvValue::Node(n) => {
                    let _ = writeln!(out, "{pad}{key}:");
                    n.render_into(out, depth + 1);
                }
            }
        }
    }
}

fn indexed<T>(items: &[T], f: impl Fn(&T) -> KvTree) -> KvTree {
    items
        .iter()
        .enumerate()
        .fold(KvTree::new(), |t, (i, item)| t.child(&i.to_string(), f(item)))
}

pub fn rate_tree(rate: &RateFunction) -> KvTree {
    match *rate {
        RateFunction::Ramp { p_max, e_sat } => KvTree::new()
            .text("kind", "ramp")
            .num("p_max", p_max)
            .num("e_sat", e_sat),
        RateFunction::Sigmoid { a, b, c, p_max } => KvTree::new()
            .text("kind", "sigmoid")
            .num("a", a)
            .num("b", b)
            .num("c", c)
            .num("p_max", p_max),
    }
}

pub fn model_tree(model: &Model) -> KvTree {
    match model {
        Model::Standard(p) => KvTree::new()
            .text("kind", "standard")
            .num("a", p.retention())
            .num("b", p.gain()),
        Model::Coupled(p) => KvTree::new()
            .text("kind", "coupled")
            .num("k", p.drive())
            .child("rate", rate_tree(p.rate())),
    }
}

pub fn paradigm_tree(paradigm: &Paradigm) -> KvTree {
    let t = KvTree::new().text("kind", paradigm.name());
    match *paradigm {
        Paradigm::Ticvf { e_clamp } => t.num("e_clamp", e_clamp),
        Paradigm::Vmr { target } => t.num("target", target),
        Paradigm::Washout => t,
    }
}

pub fn protocol_tree(protocol: &Protocol) -> KvTree {
    paradigm_tree(&protocol.paradigm())
        .int("n_trials", protocol.n_trials())
        .num("x0", protocol.x0())
}

pub fn trajectory_tree(traj: &Trajectory) -> KvTree {
    KvTree::new()
        .child("model", model_tree(&traj.model))
        .child("protocol", protocol_tree(&traj.protocol))
        .child(
            "records",
            indexed(&traj.records, |r| {
                KvTree::new().num("x", r.x).num("error", r.e).num("p", r.p)
            }),
        )
}

fn sweep_row_tree(r: &SweepRow) -> KvTree {
    KvTree::new()
        .num("error", r.error)
        .num("asymptote", r.features.asymptote)
        .num("slope", r.features.initial_slope)
        .flag("converged", r.features.converged)
}

pub fn sweep_rows_tree(rows: &[SweepRow]) -> KvTree {
    indexed(rows, sweep_row_tree)
}

fn opt_flag(v: Option<bool>) -> String {
    v.map_or_else(|| "untested".to_string(), |b| b.to_string())
}

pub fn feature_sweep_tree(sweep: &FeatureSweep) -> KvTree {
    KvTree::new()
        .flag("asymptotes_equal", sweep.asymptotes_equal)
        .text("saturated_slopes_equal", opt_flag(sweep.saturated_slopes_equal))
        .text(
            "subsaturation_slopes_increasing",
            opt_flag(sweep.subsaturation_slopes_increasing),
        )
        .child("rows", sweep_rows_tree(&sweep.rows))
}

pub fn falsification_tree(r: &FalsificationReport) -> KvTree {
    let violated: Vec<String> = r.violated().iter().map(u8::to_string).collect();
    KvTree::new()
        .text("report", "falsification")
        .child("model", model_tree(&Model::Standard(r.params)))
        .num("feature_boundary", r.boundary)
        .child(
            "rows",
            indexed(&r.rows, |row| {
                KvTree::new()
                    .num("error", row.error)
                    .num("asymptote", row.asymptote)
                    .num("slope", row.slope)
                    .num("error_ratio", row.error_ratio)
                    .num("asymptote_ratio", row.asymptote_ratio)
                    .num("slope_ratio", row.slope_ratio)
            }),
        )
        .flag("asymptote_proportional_to_error", r.asymptote_proportional)
        .flag("slope_proportional_to_error", r.slope_proportional)
        .child(
            "features",
            KvTree::new()
                .text("saturation_independent_of_error", r.feature1.as_str())
                .text("slope_depends_on_small_errors", r.feature2.as_str())
                .text("slope_independent_of_large_errors", r.feature3.as_str()),
        )
        .text("violated", format!("[{}]", violated.join(", ")))
        .flag("standard_model_falsified", !violated.is_empty())
}

pub fn uniqueness_tree(v: &UniquenessVerdict) -> KvTree {
    let failing: Vec<String> = v.failing.iter().map(|&i| fmt_f64(v.points[i].e)).collect();
    KvTree::new()
        .text("report", "uniqueness")
        .num("k_ref", v.k_ref)
        .num("tolerance", v.tol)
        .int("grid_points", v.points.len())
        .num("max_residual", v.max_residual)
        .num("worst_e", v.worst_e)
        .text("failing_e", format!("[{}]", failing.join(", ")))
        .flag("directions_agree", v.directions_agree)
        .text("verdict", if v.pass { "pass" } else { "fail" })
}

pub fn fit_problem_tree(p: &FitProblem) -> KvTree {
    let names = p.kind().param_names();
    let free = p.free().iter().fold(KvTree::new(), |t, f| {
        t.nums(names[f.index], &[f.lower, f.upper])
    });
    KvTree::new()
        .text("model", p.kind().name())
        .child("free", free)
        .child(
            "observed",
            indexed(p.observed(), |o| {
                paradigm_tree(&o.paradigm)
                    .int("trials", o.xs.len() - 1)
                    .num("x0", o.xs[0])
            }),
        )
}

pub fn fit_result_tree(r: &FitResult) -> KvTree {
    let params = r
        .named_params()
        .fold(KvTree::new(), |t, (name, v)| t.num(name, v));
    let names = r.kind.param_names();
    let as_tree = |v: &[f64]| {
        names
            .iter()
            .zip(v)
            .fold(KvTree::new(), |t, (n, x)| t.num(n, *x))
    };
    let warnings = r
        .warnings
        .iter()
        .enumerate()
        .fold(KvTree::new(), |t, (i, w)| t.text(&i.to_string(), w.as_str()));
    KvTree::new()
        .text("model", r.kind.name())
        .child("params", params)
        .num("objective", r.objective)
        .int("evaluations", r.evaluations)
        .int("iterations", r.iterations)
        .flag("converged", r.converged)
        .flag("no_improvement", r.no_improvement)
        .int("best_start", r.best_start)
        .child("warnings", warnings)
        .child(
            "starts",
            indexed(&r.starts, |s| {
                KvTree::new()
                    .child("start", as_tree(&s.start))
                    .child("optimum", as_tree(&s.optimum))
                    .num("objective", s.objective)
                    .int("evals", s.evals)
                    .flag("converged", s.converged)
            }),
        )
}

pub fn comparison_tree(c: &ModelComparison) -> KvTree {
    KvTree::new()
        .text("report", "model-comparison")
        .num("coupled_objective", c.coupled.objective)
        .num("standard_objective", c.standard.objective)
        .num("ratio", c.ratio)
        .flag("coupled_preferred", c.coupled_preferred())
        .child("coupled", fit_result_tree(&c.coupled))
        .child("standard", fit_result_tree(&c.standard))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_nested_tree() {
        let t = KvTree::new()
            .text("report", "demo")
            .child("model", KvTree::new().num("a", 0.9).num("b", 5.0))
            .flag("ok", true);
        assert_eq!(t.render(), "report: demo\nmodel:\n  a: 0.9\n  b: 5.0\nok: true\n");
        assert_eq!(t.leaf("model.b"), Some("5.0"));
        assert_eq!(t.leaf("model"), None);
        assert_eq!(t.leaf("missing.a"), None);
    }
}
