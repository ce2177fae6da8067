//! Bounded Nelder-Mead on the unit box.
//!
//! Coordinates live in `[0, 1]^n`; trial points are clamped to the box.
//! Coefficients are the standard reflection 1, expansion 2, contraction 0.5
//! and shrink 0.5.

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Edge length of the initial simplex in unit-box coordinates.
    pub initial_step: f64,
    /// Stop when every vertex is within this distance (max-norm) of the best.
    pub xtol: f64,
    /// Stop when the objective spread falls to this fraction of the best value.
    pub ftol_rel: f64,
    pub max_evals: usize,
    /// Fresh simplices built around the incumbent after a collapse.
    pub max_restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            initial_step: 0.1,
            xtol: 1e-10,
            ftol_rel: 1e-15,
            max_evals: 4000,
            max_restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub iterations: usize,
    /// Terminated on tolerance rather than the evaluation budget.
    pub converged: bool,
}

fn clamp_unit(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(0.0, 1.0);
    }
}

struct Counter<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn initial_simplex<F: FnMut(&[f64]) -> f64>(
    start: &[f64],
    step: f64,
    obj: &mut Counter<F>,
) -> Vec<(Vec<f64>, f64)> {
    let mut x0 = start.to_vec();
    clamp_unit(&mut x0);
    let f0 = obj.call(&x0);
    let mut simplex = vec![(x0.clone(), f0)];
    for i in 0..x0.len() {
        let mut v = x0.clone();
        v[i] = if v[i] + step <= 1.0 { v[i] + step } else { v[i] - step };
        let fv = obj.call(&v);
        simplex.push((v, fv));
    }
    simplex
}

fn sort(simplex: &mut [(Vec<f64>, f64)]) {
    // Stable, so ties keep insertion order and runs stay reproducible.
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}

fn spread(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Minimises `f` over the unit box from `start`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(f: F, start: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let n = start.len();
    assert!(n > 0, "simplex needs at least one dimension");
    let mut obj = Counter { f, evals: 0 };
    let mut simplex = initial_simplex(start, opts.initial_step, &mut obj);
    let mut iterations = 0;
    let mut restarts = 0;
    let mut converged = false;

    loop {
        sort(&mut simplex);
        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;

        // The objective is a sum of squares; zero cannot be improved on.
        let collapsed = f_best == 0.0
            || spread(&simplex) <= opts.xtol
            || (f_worst - f_best) <= opts.ftol_rel * f_best.abs();
        if collapsed {
            if f_best == 0.0 || restarts >= opts.max_restarts || obj.evals + n + 1 > opts.max_evals {
                converged = true;
                break;
            }
            restarts += 1;
            let best = simplex[0].clone();
            let step = (opts.initial_step * 0.1f64.powi(restarts as i32)).max(opts.xtol * 10.0);
            simplex = initial_simplex(&best.0, step, &mut obj);
            if simplex[0].1 > best.1 {
                simplex[0] = best;
            }
            continue;
        }
        if obj.evals >= opts.max_evals {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp_unit(&mut p);
            p
        };

        let xr = along(REFLECT);
        let fr = obj.call(&xr);
        if fr < f_best {
            let xe = along(REFLECT * EXPAND);
            let fe = obj.call(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < f_worst {
            let xc = along(REFLECT * CONTRACT);
            let fc = obj.call(&xc);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = obj.call(&xc);
            (xc, fc)
        };
        if fc < fr.min(f_worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (v, fv) in simplex[1..].iter_mut() {
            for (x, b) in v.iter_mut().zip(&best) {
                *x = b + SHRINK * (*x - b);
            }
            *fv = obj.call(v);
        }
    }

    let (x, fx) = simplex.swap_remove(0);
    SimplexResult {
        x,
        fx,
        evals: obj.evals,
        iterations,
        converged,
    }
}
