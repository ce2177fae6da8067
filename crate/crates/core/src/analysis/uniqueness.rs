//! Numerical check that, among updates `x' = f(e) x + g(e)`, only
//! `f = 1 - g / K` gives the same asymptote `K` for every clamped error.
//!
//! Each grid point is checked two ways: the closed-form residual
//! `|f - (1 - g/K)|`, and the asymptote reached by actually iterating the
//! map. For a contractive point the iterated asymptote `X` satisfies
//! `(1 - f)(X - K)/K = g/K - (1 - f)`, so the same residual can be read back
//! from the simulation; the two readings must agree.

use crate::error::{Error, Result};
use crate::model::ErrorSignal;
use crate::rate::RateFunction;

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyPoint {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

/// Tabulated `f` and `g` on a shared error grid, tested against `k_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralLinearFamily {
    points: Vec<FamilyPoint>,
    k_ref: f64,
}

impl GeneralLinearFamily {
    pub fn new(points: Vec<FamilyPoint>, k_ref: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("family grid is empty".into()));
        }
        if !k_ref.is_finite() || k_ref == 0.0 {
            return Err(Error::InvalidInput(format!(
                "k_ref must be finite and nonzero, got {k_ref}"
            )));
        }
        for p in &points {
            if !(p.e.is_finite() && p.f.is_finite() && p.g.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite family value at e = {}",
                    p.e
                )));
            }
            if p.f <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "f must be positive, got {} at e = {}",
                    p.f, p.e
                )));
            }
        }
        Ok(GeneralLinearFamily { points, k_ref })
    }

    /// Tabulates closed-form `f` and `g` on `grid`.
    pub fn tabulate(
        grid: &[f64],
        f: impl Fn(f64) -> f64,
        g: impl Fn(f64) -> f64,
        k_ref: f64,
    ) -> Result<Self> {
        let points = grid
            .iter()
            .map(|&e| FamilyPoint { e, f: f(e), g: g(e) })
            .collect();
        GeneralLinearFamily::new(points, k_ref)
    }

    /// The coupled model's own family: `f = 1 - P`, `g = P k_ref`.
    pub fn from_rate(rate: &RateFunction, grid: &[f64], k_ref: f64) -> Result<Self> {
        rate.validate()?;
        let points = grid
            .iter()
            .map(|&e| {
                let p = rate.learning_rate(ErrorSignal::new(e)?);
                Ok(FamilyPoint { e, f: 1.0 - p, g: p * k_ref })
            })
            .collect::<Result<_>>()?;
        GeneralLinearFamily::new(points, k_ref)
    }

    pub fn points(&self) -> &[FamilyPoint] {
        &self.points
    }

    pub fn points_mut(&mut self) -> &mut [FamilyPoint] {
        &mut self.points
    }

    pub fn k_ref(&self) -> f64 {
        self.k_ref
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessOptions {
    pub tol: f64,
    /// Starting state for the iterated asymptote.
    pub x0: f64,
    pub n_max: usize,
}

impl Default for UniquenessOptions {
    fn default() -> Self {
        UniquenessOptions {
            tol: DEFAULT_RESIDUAL_TOL,
            x0: 0.0,
            n_max: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointVerdict {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    /// `|f - (1 - g / k_ref)|`.
    pub residual: f64,
    /// Iterated asymptote from `x0`, `None` if the iteration did not settle.
    pub asymptote: Option<f64>,
    /// Residual read back from the iterated asymptote (contractive points only).
    pub empirical_residual: Option<f64>,
    pub relation_holds: bool,
    pub asymptote_at_k: bool,
    /// Both readings of the point agree.
    pub directions_agree: bool,
}

impl PointVerdict {
    pub fn passes(&self) -> bool {
        self.relation_holds && self.asymptote_at_k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessVerdict {
    pub k_ref: f64,
    pub tol: f64,
    pub points: Vec<PointVerdict>,
    pub max_residual: f64,
    /// Grid error with the largest residual.
    pub worst_e: f64,
    /// Indices of failing grid points.
    pub failing: Vec<usize>,
    /// Closed-form and iterated readings agree at every resolved point.
    pub directions_agree: bool,
    pub pass: bool,
}

/// Iterates `x' = f x + g` until successive states agree to a few ulps.
fn iterate_asymptote(f: f64, g: f64, x0: f64, scale: f64, n_max: usize) -> Option<f64> {
    let mut x = x0;
    for _ in 0..n_max {
        let next = f * x + g;
        if !next.is_finite() {
            return None;
        }
        let settle = 4.0 * f64::EPSILON * next.abs().max(scale);
        if (next - x).abs() <= settle {
            return Some(next);
        }
        x = next;
    }
    None
}

pub fn verify_uniqueness(
    family: &GeneralLinearFamily,
    opts: &UniquenessOptions,
) -> Result<UniquenessVerdict> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let k = family.k_ref;
    let tol = opts.tol;

    for p in &family.points {
        if p.f >= 1.0 && p.g != k * (1.0 - p.f) {
            return Err(Error::NonContractiveFamily {
                e: p.e,
                f: p.f,
                g: p.g,
            });
        }
    }

    let points: Vec<PointVerdict> = family
        .points
        .iter()
        .map(|p| {
            let residual = (p.f - (1.0 - p.g / k)).abs();
            let relation_holds = residual < tol;
            if p.f < 1.0 {
                let asymptote = iterate_asymptote(p.f, p.g, opts.x0, k.abs(), opts.n_max);
                let empirical_residual = asymptote.map(|x| ((1.0 - p.f) * (x - k) / k).abs());
                let asymptote_at_k = empirical_residual.is_some_and(|r| r < tol);
                let directions_agree = match empirical_residual {
                    Some(r) => asymptote_at_k == relation_holds || (r - residual).abs() <= 0.01 * tol,
                    None => true,
                };
                PointVerdict {
                    e: p.e,
                    f: p.f,
                    g: p.g,
                    residual,
                    asymptote,
                    empirical_residual,
                    relation_holds,
                    asymptote_at_k,
                    directions_agree,
                }
            } else {
                // f >= 1 with g = k (1 - f): k is fixed but nothing contracts
                // toward it, so the state only sits at k if it starts there.
                let at_k = (opts.x0 - k).abs() <= tol * k.abs();
                let asymptote = (p.f == 1.0).then_some(opts.x0);
                PointVerdict {
                    e: p.e,
                    f: p.f,
                    g: p.g,
                    residual,
                    asymptote,
                    empirical_residual: None,
                    relation_holds,
                    asymptote_at_k: at_k,
                    directions_agree: true,
                }
            }
        })
        .collect();

    let (worst_idx, max_residual) = points
        .iter()
        .map(|p| p.residual)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, r)| if r > best.1 { (i, r) } else { best });
    let failing: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.passes())
        .map(|(i, _)| i)
        .collect();
    let directions_agree = points.iter().all(|p| p.directions_agree);

    Ok(UniquenessVerdict {
        k_ref: k,
        tol,
        worst_e: points[worst_idx].e,
        max_residual,
        pass: failing.is_empty(),
        failing,
        directions_agree,
        points,
    })
}
