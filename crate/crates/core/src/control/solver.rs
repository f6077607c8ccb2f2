use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus};

use super::config::ControlConfig;
use super::objective::{evaluate_objective, worst_case_sequence, DisturbanceMode, ObjectiveValue};
use crate::error::{input_err, Error, Result};
use crate::forecast::Envelope;
use crate::plant::{rk4_step, PlantParams, GRAMS_TO_KG};

#[derive(Clone, Debug, PartialEq)]
pub struct ControlSolution {
    /// Heater power per step, kW.
    pub u_seq: Vec<f64>,
    /// Temperature after each step under the worst-case disturbance, °C.
    pub predicted_t: Vec<f64>,
    pub j_total: f64,
    pub j_ec: f64,
    pub j_cv: f64,
    /// Linearize-and-solve passes performed.
    pub solver_iterations: usize,
    pub converged: bool,
}

impl ControlSolution {
    /// The sequence advanced by one step with its last entry repeated, used
    /// to warm-start the next solve.
    pub fn shifted(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.u_seq.iter().skip(1).copied().collect();
        if let Some(&last) = self.u_seq.last() {
            s.push(last);
        }
        s
    }

    fn from_value(u_seq: Vec<f64>, v: ObjectiveValue, iterations: usize, converged: bool) -> Self {
        Self {
            u_seq,
            predicted_t: v.predicted_t,
            j_total: v.j_total,
            j_ec: v.j_ec,
            j_cv: v.j_cv,
            solver_iterations: iterations,
            converged,
        }
    }
}

/// Solves the robust problem for a forecast envelope: the disturbance is
/// fixed at `worst_case_sequence(envelope, mode)` and the input sequence is
/// optimized against it.
pub fn solve_rempc(
    t0: f64,
    envelope: &Envelope,
    mode: &DisturbanceMode,
    params: &PlantParams,
    config: &ControlConfig,
    warm_u: Option<&[f64]>,
) -> Result<ControlSolution> {
    if envelope.len() != config.np {
        return input_err(format!(
            "envelope has {} steps, controller horizon is {}",
            envelope.len(),
            config.np
        ));
    }
    let mdot = worst_case_sequence(envelope, mode)?;
    solve_for_disturbance(t0, &mdot, params, config, warm_u)
}

/// Minimizes the objective over the input box for a known disturbance
/// sequence (g/s).
///
/// Each pass linearizes the temperature trajectory around the current
/// inputs, solves the resulting quadratic program with the violation slacks
/// as extra variables, and backtracks on the true objective. A step is only
/// taken when it lowers the objective, so the result never scores worse than
/// the start point.
pub fn solve_for_disturbance(
    t0: f64,
    mdot_gps: &[f64],
    params: &PlantParams,
    config: &ControlConfig,
    warm_u: Option<&[f64]>,
) -> Result<ControlSolution> {
    config.validate()?;
    let n = config.np;
    if mdot_gps.len() != n {
        return input_err(format!("disturbance has {} steps, horizon is {n}", mdot_gps.len()));
    }
    if !t0.is_finite() {
        return input_err("initial temperature must be finite");
    }
    if let Some(w) = warm_u {
        if w.len() != n {
            return input_err(format!("warm start has {} steps, horizon is {n}", w.len()));
        }
    }

    let clamp = |u: f64| u.clamp(config.u_min, config.u_max);
    let mut probes: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = warm_u {
        probes.push(w.iter().map(|&u| clamp(u)).collect());
    }
    probes.push(vec![config.u_mid(); n]);
    let start = probes.into_iter().find_map(|u| {
        let v = evaluate_objective(&u, mdot_gps, t0, params, config).ok()?;
        v.j_total.is_finite().then_some((u, v))
    });
    let Some((mut u, mut value)) = start else {
        return Err(Error::Solver("objective is not finite at any start point".into()));
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        iterations += 1;
        let Some(candidate) = solve_linearized(t0, &u, &value.predicted_t, mdot_gps, params, config) else {
            break;
        };
        let mut improved = None;
        let mut alpha = 1.0;
        for _ in 0..12 {
            let trial: Vec<f64> = u
                .iter()
                .zip(&candidate)
                .map(|(a, c)| clamp(a + alpha * (c - a)))
                .collect();
            if let Ok(v) = evaluate_objective(&trial, mdot_gps, t0, params, config) {
                if v.j_total < value.j_total {
                    improved = Some((trial, v));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, v)) = improved else {
            converged = true;
            break;
        };
        let decrease = value.j_total - v.j_total;
        u = trial;
        value = v;
        if decrease <= config.tolerance * value.j_total.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(ControlSolution::from_value(u, value, iterations, converged))
}

/// Quadratic subproblem around `u_ref`. Variables are the inputs followed by
/// one slack per step for each active soft bound.
fn solve_linearized(
    t0: f64,
    u_ref: &[f64],
    t_ref: &[f64],
    mdot_gps: &[f64],
    params: &PlantParams,
    config: &ControlConfig,
) -> Option<Vec<f64>> {
    let n = u_ref.len();
    let sens = sensitivities(t0, u_ref, t_ref, mdot_gps, params, config.h);
    // Affine part of the linearized trajectory: T ≈ offset + S·u.
    let offset: Vec<f64> = (0..n)
        .map(|i| t_ref[i] - (0..=i).map(|j| sens[i][j] * u_ref[j]).sum::<f64>())
        .collect();
    let upper = config.x_max.filter(|_| config.eta_upper > 0.0);
    let n_slack = if upper.is_some() { 2 * n } else { n };
    let nv = n + n_slack;

    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for i in 0..n {
        // x_min - offset_i - S_i·u - g_i <= 0
        let mut r: Vec<(usize, f64)> = (0..=i).map(|j| (j, -sens[i][j])).collect();
        r.push((n + i, -1.0));
        rows.push((r, offset[i] - config.x_min));
        rows.push((vec![(n + i, -1.0)], 0.0));
        rows.push((vec![(i, 1.0)], config.u_max));
        rows.push((vec![(i, -1.0)], -config.u_min));
        if let Some(x_max) = upper {
            let mut r: Vec<(usize, f64)> = (0..=i).map(|j| (j, sens[i][j])).collect();
            r.push((2 * n + i, -1.0));
            rows.push((r, x_max - offset[i]));
            rows.push((vec![(2 * n + i, -1.0)], 0.0));
        }
    }
    let a = csc_from_rows(&rows, nv);
    let b: Vec<f64> = rows.iter().map(|(_, b)| *b).collect();

    let p_diag = 2.0 * config.input_weight;
    let p = if p_diag > 0.0 {
        CscMatrix::new(
            nv,
            nv,
            (0..=nv).map(|j| j.min(n)).collect(),
            (0..n).collect(),
            vec![p_diag; n],
        )
    } else {
        CscMatrix::zeros((nv, nv))
    };
    let mut q = vec![0.0; nv];
    q[n..2 * n].fill(config.eta_lower);
    if upper.is_some() {
        q[2 * n..].fill(config.eta_upper);
    }

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(config.qp_max_iterations)
        .build()
        .ok()?;
    let cones = [NonnegativeConeT(b.len())];
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings).ok()?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            let x = &solver.solution.x[..n];
            x.iter().all(|v| v.is_finite()).then(|| x.to_vec())
        }
        _ => None,
    }
}

/// `S[i][j] = ∂T_{i+1}/∂u_j` along the reference trajectory, built from
/// central differences of the one-step map.
fn sensitivities(t0: f64, u: &[f64], t_ref: &[f64], mdot_gps: &[f64], params: &PlantParams, h: f64) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut s = vec![vec![0.0; n]; n];
    let mut t_prev = t0;
    for i in 0..n {
        let m = mdot_gps[i] * GRAMS_TO_KG;
        let step = |t: f64, q: f64| rk4_step(params, t, q, m, h);
        let et = 1e-3 * t_prev.abs().max(1.0);
        let eu = 1e-3 * u[i].abs().max(1.0);
        let dt = (step(t_prev + et, u[i]) - step(t_prev - et, u[i])) / (2.0 * et);
        let du = (step(t_prev, u[i] + eu) - step(t_prev, u[i] - eu)) / (2.0 * eu);
        if i > 0 {
            for j in 0..i {
                s[i][j] = dt * s[i - 1][j];
            }
        }
        s[i][i] = du;
        t_prev = t_ref[i];
    }
    s
}

fn csc_from_rows(rows: &[(Vec<(usize, f64)>, f64)], ncols: usize) -> CscMatrix<f64> {
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncols];
    for (r, (entries, _)) in rows.iter().enumerate() {
        for &(c, v) in entries {
            if v != 0.0 {
                cols[c].push((r, v));
            }
        }
    }
    let mut colptr = Vec::with_capacity(ncols + 1);
    let (mut rowval, mut nzval) = (Vec::new(), Vec::new());
    colptr.push(0);
    for col in cols {
        for (r, v) in col {
            rowval.push(r);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(rows.len(), ncols, colptr, rowval, nzval)
}
