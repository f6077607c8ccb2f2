//! Limited-memory BFGS restricted to a box, used for hyperparameter fitting.
//!
//! Variables sitting on a bound with the gradient pushing outward are frozen
//! for the step; trial points are projected back into the box and accepted on
//! an Armijo condition. Every accepted iterate has a strictly lower objective
//! than the one before it.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
pub struct BoxLbfgsOptions {
    pub max_iterations: usize,
    /// Stop once the projected gradient's largest entry falls below this.
    pub grad_tol: f64,
    /// Stop once an iteration improves the objective by less than
    /// `f_tol·(1 + |f|)`.
    pub f_tol: f64,
    pub memory: usize,
    /// Largest move of any coordinate in one step.
    pub max_step: f64,
}

impl Default for BoxLbfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            grad_tol: 1e-5,
            f_tol: 1e-9,
            memory: 8,
            max_step: 2.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` over `[lower, upper]` starting from `x0`.
///
/// `f` returns `None` where the objective is undefined (non-finite or a
/// failed factorization); such points are treated as infinitely bad. Returns
/// `None` only if the (projected) start point itself cannot be evaluated.
pub fn minimize_box<F>(
    mut f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &BoxLbfgsOptions,
) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let project = |x: &mut [f64]| {
        for i in 0..n {
            x[i] = x[i].clamp(lower[i], upper[i]);
        }
    };
    let mut x = x0.to_vec();
    project(&mut x);
    let mut evaluations = 1;
    let (mut fx, mut g) = f(&x).filter(|(v, g)| v.is_finite() && g.iter().all(|d| d.is_finite()))?;

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        // Freeze coordinates pinned at a bound.
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)))
            .collect();
        let pg_norm = (0..n)
            .filter(|&i| free[i])
            .map(|i| g[i].abs())
            .fold(0.0, f64::max);
        if pg_norm < opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut d = two_loop(&g, &history, &free);
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            history.clear();
            d = (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }).collect();
        }
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut step = if history.is_empty() {
            (opts.max_step.min(1.0)) / dmax.max(1e-300)
        } else {
            1.0f64.min(opts.max_step / dmax.max(1e-300))
        };

        let mut accepted = None;
        for _ in 0..40 {
            let mut xt: Vec<f64> = (0..n).map(|i| x[i] + step * d[i]).collect();
            project(&mut xt);
            let decrease: f64 = (0..n).map(|i| g[i] * (xt[i] - x[i])).sum();
            evaluations += 1;
            if let Some((ft, gt)) = f(&xt) {
                if ft.is_finite()
                    && gt.iter().all(|v| v.is_finite())
                    && ft <= fx + 1e-4 * decrease.min(0.0)
                    && ft < fx
                {
                    accepted = Some((xt, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            // No decrease along the search direction: treat as a stationary point
            // when the gradient is already small relative to the objective.
            converged = pg_norm < 1e-3 * (1.0 + fx.abs());
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let improvement = fx - fnew;
        x = xn;
        g = gnew;
        fx = fnew;
        if improvement < opts.f_tol * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
    }

    Some(Minimum {
        x,
        value: fx,
        iterations,
        evaluations,
        converged,
    })
}

/// `-H·g` from the stored curvature pairs, restricted to free coordinates.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, free: &[bool]) -> Vec<f64> {
    let mut q: Vec<f64> = g.iter().zip(free).map(|(v, &f)| if f { *v } else { 0.0 }).collect();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * s.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let yy: f64 = y.iter().map(|v| v * v).sum();
        let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
        let gamma = sy / yy;
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * y.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter()
        .zip(free)
        .map(|(v, &f)| if f { -v } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_converges() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            Some((v, g))
        };
        let opts = BoxLbfgsOptions {
            max_iterations: 500,
            f_tol: 0.0,
            grad_tol: 1e-8,
            ..Default::default()
        };
        let m = minimize_box(f, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], &opts).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
    }

    #[test]
    fn active_bound_is_respected() {
        // Unconstrained minimum at (3, -1); box keeps x0 ≤ 1.
        let f = |x: &[f64]| {
            let v = (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2);
            Some((v, vec![2.0 * (x[0] - 3.0), 2.0 * (x[1] + 1.0)]))
        };
        let m = minimize_box(f, &[0.0, 0.0], &[-2.0, -2.0], &[1.0, 2.0], &Default::default()).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-9);
        assert!((m.x[1] + 1.0).abs() < 1e-5);
    }

    #[test]
    fn undefined_start_returns_none() {
        let f = |_: &[f64]| None;
        assert!(minimize_box(f, &[0.0], &[-1.0], &[1.0], &Default::default()).is_none());
    }
}
