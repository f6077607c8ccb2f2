//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use hybrid_rempc::gp::Kernel;
use twofloat::TwoFloat;

pub type Dd = TwoFloat;

pub fn dd(x: f64) -> Dd {
    TwoFloat::from(x)
}

/// Kernel evaluated from its textbook formula in double-double arithmetic.
pub fn dd_kernel(k: &Kernel, x: &[f64], y: &[f64]) -> Dd {
    let sq_dist = || {
        x.iter().zip(y).fold(dd(0.0), |acc, (a, b)| {
            let d = dd(*a) - dd(*b);
            acc + d * d
        })
    };
    match k {
        Kernel::Rbf { scale, length } => {
            let s = dd(*scale);
            let l = dd(*length);
            s * s * (-(sq_dist()) / (dd(2.0) * l * l)).exp()
        }
        Kernel::Linear { scale } => {
            let s = dd(*scale);
            let dot = x.iter().zip(y).fold(dd(0.0), |acc, (a, b)| acc + dd(*a) * dd(*b));
            dot / (s * s)
        }
        Kernel::Periodic {
            scale,
            period,
            roughness,
        } => {
            let s = dd(*scale);
            let r = dd(*roughness);
            let dist = sq_dist().sqrt();
            let sn = (twofloat::consts::PI * dist / dd(*period)).sin();
            s * s * (dd(-2.0) * sn * sn / (r * r)).exp()
        }
        Kernel::Constant { level } => dd(*level),
        Kernel::Sum { terms } => terms.iter().fold(dd(0.0), |acc, t| acc + dd_kernel(t, x, y)),
    }
}

/// Inverse and log-determinant by Gauss–Jordan elimination with partial
/// pivoting, all in double-double.
pub fn dd_inverse_logdet(a: &[Vec<Dd>]) -> (Vec<Vec<Dd>>, Dd) {
    let n = a.len();
    let mut m: Vec<Vec<Dd>> = a.to_vec();
    let mut inv: Vec<Vec<Dd>> = (0..n)
        .map(|i| (0..n).map(|j| dd(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    let mut logdet = dd(0.0);
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, p);
        inv.swap(col, p);
        let piv = m[col][col];
        logdet += piv.abs().ln();
        for j in 0..n {
            m[col][j] /= piv;
            inv[col][j] /= piv;
        }
        for i in 0..n {
            if i != col {
                let f = m[i][col];
                if f != dd(0.0) {
                    for j in 0..n {
                        let (mc, ic) = (m[col][j], inv[col][j]);
                        m[i][j] -= f * mc;
                        inv[i][j] -= f * ic;
                    }
                }
            }
        }
    }
    (inv, logdet)
}

pub struct DdPosterior {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub lml: f64,
}

/// Posterior and log marginal likelihood from the dense-inverse formulas:
/// `m = μ + K*ᵀ(K+σ²I)⁻¹(y-μ)`, `C = K** - K*ᵀ(K+σ²I)⁻¹K*`,
/// `log p = -½ rᵀ(K+σ²I)⁻¹r - ½ log|K+σ²I| - (n/2) log 2π` with `r = y - ȳ`.
pub fn dd_gp(kernel: &Kernel, sigma2: f64, xs: &[Vec<f64>], ys: &[f64], queries: &[Vec<f64>], prior_mean: f64) -> DdPosterior {
    let n = xs.len();
    let kxx: Vec<Vec<Dd>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| dd_kernel(kernel, &xs[i], &xs[j]) + if i == j { dd(sigma2) } else { dd(0.0) })
                .collect()
        })
        .collect();
    let (inv, logdet) = dd_inverse_logdet(&kxx);
    let matvec = |v: &[Dd]| -> Vec<Dd> {
        (0..n)
            .map(|i| (0..n).fold(dd(0.0), |acc, j| acc + inv[i][j] * v[j]))
            .collect()
    };

    let r: Vec<Dd> = ys.iter().map(|y| dd(*y) - dd(prior_mean)).collect();
    let alpha = matvec(&r);
    let kq: Vec<Vec<Dd>> = queries
        .iter()
        .map(|q| xs.iter().map(|x| dd_kernel(kernel, q, x)).collect())
        .collect();
    let mean: Vec<f64> = kq
        .iter()
        .map(|k| (k.iter().zip(&alpha).fold(dd(prior_mean), |acc, (a, b)| acc + *a * *b)).hi())
        .collect();
    let vq: Vec<Vec<Dd>> = kq.iter().map(|k| matvec(k)).collect();
    let cov: Vec<Vec<f64>> = (0..queries.len())
        .map(|a| {
            (0..queries.len())
                .map(|b| {
                    let prior = dd_kernel(kernel, &queries[a], &queries[b]);
                    let red = kq[a].iter().zip(&vq[b]).fold(dd(0.0), |acc, (x, y)| acc + *x * *y);
                    (prior - red).hi()
                })
                .collect()
        })
        .collect();

    let ybar = ys.iter().fold(dd(0.0), |acc, y| acc + dd(*y)) / dd(n as f64);
    let rc: Vec<Dd> = ys.iter().map(|y| dd(*y) - ybar).collect();
    let ac = matvec(&rc);
    let quad = rc.iter().zip(&ac).fold(dd(0.0), |acc, (a, b)| acc + *a * *b);
    let two_pi = dd(2.0) * twofloat::consts::PI;
    let lml = dd(-0.5) * quad - dd(0.5) * logdet - dd(0.5 * n as f64) * two_pi.ln();
    DdPosterior {
        mean,
        cov,
        lml: lml.hi(),
    }
}

/// Maximizes `bᵀy` subject to `Aᵀy ≤ c`, `y ≥ 0` with a dense tableau and
/// Bland's rule. `c` must be non-negative so the origin is feasible.
/// `a` is the primal constraint matrix (rows = primal constraints).
pub fn simplex_dual_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let m = c.len(); // dual constraints, one per primal variable
    let n = b.len(); // dual variables, one per primal constraint
    assert!(c.iter().all(|v| *v >= 0.0));
    // Tableau rows: m constraints with slack columns, last row the objective.
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for j in 0..m {
        for i in 0..n {
            t[j][i] = a[i][j];
        }
        t[j][n + j] = 1.0;
        t[j][width - 1] = c[j];
    }
    for i in 0..n {
        t[m][i] = -b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..n + m).find(|&k| t[m][k] < -1e-15) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            if t[r][enter] > 1e-15 {
                let ratio = t[r][width - 1] / t[r][enter];
                let better = match leave {
                    None => true,
                    Some((lr, best)) => ratio < best || (ratio == best && basis[r] < basis[lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let (r, _) = leave.expect("dual is bounded because the primal is feasible");
        let piv = t[r][enter];
        for v in t[r].iter_mut() {
            *v /= piv;
        }
        for row in 0..=m {
            if row != r {
                let f = t[row][enter];
                if f != 0.0 {
                    for k in 0..width {
                        t[row][k] -= f * t[r][k];
                    }
                }
            }
        }
        basis[r] = enter;
    }
    t[m][width - 1]
}

/// Minimal weighted slack for a temperature trajectory, as a linear program:
/// `min Σ η̲γ̲ᵢ + η̄γ̄ᵢ` s.t. `γ̲ᵢ ≥ x̲ - Tᵢ`, `γ̄ᵢ ≥ Tᵢ - x̄`, `γ ≥ 0`,
/// solved through its dual.
pub fn slack_lp(temps: &[f64], x_min: f64, x_max: Option<f64>, eta_lo: f64, eta_hi: f64) -> f64 {
    let n = temps.len();
    let nv = if x_max.is_some() { 2 * n } else { n };
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, t) in temps.iter().enumerate() {
        let mut row = vec![0.0; nv];
        row[i] = 1.0;
        a.push(row);
        b.push(x_min - t);
        if let Some(xm) = x_max {
            let mut row = vec![0.0; nv];
            row[n + i] = 1.0;
            a.push(row);
            b.push(t - xm);
        }
    }
    let mut c = vec![eta_lo; n];
    if x_max.is_some() {
        c.extend(vec![eta_hi; n]);
    }
    simplex_dual_max(&a, &b, &c)
}

/// Tank model written out independently of the library.
pub struct Tank {
    pub mass: f64,
    pub cp: f64,
    pub t_in: f64,
    pub t_amb: f64,
    pub u: f64,
}

pub const TANK: Tank = Tank {
    mass: 0.7854,
    cp: 6.9244,
    t_in: 20.0,
    t_amb: 15.0,
    u: 1e-7,
};

impl Tank {
    pub fn rate(&self, t: f64, q: f64, mdot_kg: f64) -> f64 {
        (q - mdot_kg * self.cp * (t - self.t_in) - self.u * (t - self.t_amb)) / (self.mass * self.cp)
    }

    pub fn rk4(&self, t: f64, q: f64, mdot_kg: f64, h: f64) -> f64 {
        let k1 = self.rate(t, q, mdot_kg);
        let k2 = self.rate(t + h / 2.0 * k1, q, mdot_kg);
        let k3 = self.rate(t + h / 2.0 * k2, q, mdot_kg);
        let k4 = self.rate(t + h * k3, q, mdot_kg);
        t + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    }

    /// Exact solution of the linear ODE under constant inputs.
    pub fn exact(&self, t0: f64, q: f64, mdot_kg: f64, time: f64) -> f64 {
        let b = (mdot_kg * self.cp + self.u) / (self.mass * self.cp);
        let a = (q + mdot_kg * self.cp * self.t_in + self.u * self.t_amb) / (self.mass * self.cp);
        let t_inf = a / b;
        t_inf + (t0 - t_inf) * (-b * time).exp()
    }

    /// Objective `Σ uᵢ² + η·max(0, x_min - Tᵢ)` for flows in g/s.
    pub fn objective(&self, u: &[f64], mdot_gps: &[f64], t0: f64, h: f64, x_min: f64, eta: f64) -> f64 {
        let mut t = t0;
        let mut j = 0.0;
        for (q, m) in u.iter().zip(mdot_gps) {
            t = self.rk4(t, *q, m * 1e-3, h);
            j += q * q + eta * (x_min - t).max(0.0);
        }
        j
    }
}

/// Exhaustive minimum of [`Tank::objective`] over `levels` evenly spaced
/// inputs per step in `[lo, hi]`.
pub fn grid_minimum(np: usize, levels: usize, lo: f64, hi: f64, mdot_gps: &[f64], t0: f64, h: f64, x_min: f64, eta: f64) -> (f64, Vec<f64>) {
    let grid: Vec<f64> = (0..levels).map(|i| lo + (hi - lo) * i as f64 / (levels - 1) as f64).collect();
    let mut best = (f64::INFINITY, Vec::new());
    let mut idx = vec![0usize; np];
    loop {
        let u: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
        let j = TANK.objective(&u, mdot_gps, t0, h, x_min, eta);
        if j < best.0 {
            best = (j, u);
        }
        let mut pos = 0;
        loop {
            if pos == np {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] < levels {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Worst relative discrepancies between the library and the double-double
/// oracle on one random regression problem.
#[derive(Debug, Clone, Copy)]
pub struct GpDiscrepancy {
    pub mean: f64,
    pub cov: f64,
    pub lml: f64,
}

impl GpDiscrepancy {
    pub fn worst(&self) -> f64 {
        self.mean.max(self.cov).max(self.lml)
    }
}

fn inf_norm_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Draws a random kernel, noise level and dataset (N ≤ 50, dimension 1..=3)
/// from `seed` and compares posterior and likelihood against [`dd_gp`].
pub fn gp_oracle_case(seed: u64) -> GpDiscrepancy {
    use hybrid_rempc::gp::{log_marginal_likelihood, posterior, GpDataset, InputGrid, NoiseModel};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=3usize);
    let n = rng.random_range(2..=50usize);
    let m = rng.random_range(1..=8usize);
    let atom = |rng: &mut rand_chacha::ChaCha8Rng, pick: u32| match pick {
        0 => Kernel::Rbf {
            scale: rng.random_range(0.5..3.0),
            length: rng.random_range(0.5..5.0),
        },
        1 => Kernel::Periodic {
            scale: rng.random_range(0.5..3.0),
            period: rng.random_range(2.0..20.0),
            roughness: rng.random_range(0.5..2.0),
        },
        2 => Kernel::Linear {
            scale: rng.random_range(2.0..10.0),
        },
        _ => Kernel::Constant {
            level: rng.random_range(0.0..2.0),
        },
    };
    // A periodic kernel of the Euclidean distance is only positive definite
    // on one-dimensional inputs.
    let pick = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let p = rng.random_range(0..4u32);
        if p != 1 || dim == 1 {
            return p;
        }
    };
    let kernel = match rng.random_range(0..3u32) {
        0 => atom(&mut rng, 0),
        1 if dim == 1 => atom(&mut rng, 1),
        _ => {
            let k = rng.random_range(2..=4usize);
            Kernel::Sum {
                terms: (0..k)
                    .map(|_| {
                        let p = pick(&mut rng);
                        atom(&mut rng, p)
                    })
                    .collect(),
            }
        }
    };
    let sigma2 = rng.random_range(0.05..2.0);
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x.iter().map(|v| v.sin()).sum::<f64>() * 3.0 + rng.random_range(-1.0..1.0) + 10.0).collect();
    let qs: Vec<Vec<f64>> = (0..m).map(|_| (0..dim).map(|_| rng.random_range(-6.0..6.0)).collect()).collect();
    let prior_mean = ys.iter().sum::<f64>() / n as f64;

    let data = GpDataset::new(InputGrid::from_rows(&xs).unwrap(), ys.clone(), (0..n).map(|i| i as f64).collect()).unwrap();
    let noise = NoiseModel::new(sigma2).unwrap();
    let post = posterior(&kernel, noise, &data, &InputGrid::from_rows(&qs).unwrap(), prior_mean, None).unwrap();
    let lml = log_marginal_likelihood(&kernel, noise, &data, None, 0.0).unwrap();
    let oracle = dd_gp(&kernel, sigma2, &xs, &ys, &qs, prior_mean);

    let cov_lib: Vec<f64> = (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).map(|(a, b)| post.cov[(a, b)]).collect();
    let cov_orc: Vec<f64> = oracle.cov.iter().flatten().copied().collect();
    GpDiscrepancy {
        mean: inf_norm_rel(post.mean.as_slice(), &oracle.mean),
        cov: inf_norm_rel(&cov_lib, &cov_orc),
        lml: (lml - oracle.lml).abs() / oracle.lml.abs().max(f64::MIN_POSITIVE),
    }
}

/// Error of the library's RK4 integration against the exact solution after
/// `span` seconds with step `h`, under constant heater power and flow (kg/s).
pub fn rk4_error(h: f64, span: f64, t0: f64, q: f64, mdot_kg: f64) -> f64 {
    use hybrid_rempc::plant::{rk4_step, PlantParams};
    let p = PlantParams::default();
    let steps = (span / h).round() as usize;
    let mut t = t0;
    for _ in 0..steps {
        t = rk4_step(&p, t, q, mdot_kg, h);
    }
    (t - TANK.exact(t0, q, mdot_kg, span)).abs()
}

/// Library violation cost of a random trajectory against the slack LP.
/// Returns `(closed_form, lp_minimum)`.
pub fn slack_case(seed: u64) -> (f64, f64) {
    use hybrid_rempc::control::{evaluate_objective, ControlConfig};
    use hybrid_rempc::plant::PlantParams;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x51AC);
    let np = rng.random_range(1..=30usize);
    let with_upper = rng.random_bool(0.5);
    let cfg = ControlConfig {
        np,
        x_min: rng.random_range(45.0..60.0),
        x_max: with_upper.then(|| rng.random_range(60.0..70.0)),
        eta_lower: rng.random_range(0.0..50.0),
        eta_upper: if with_upper { rng.random_range(0.0..50.0) } else { 0.0 },
        ..ControlConfig::default()
    };
    let u: Vec<f64> = (0..np).map(|_| rng.random_range(0.0..10.0)).collect();
    let m: Vec<f64> = (0..np).map(|_| rng.random_range(0.0..70.0)).collect();
    let t0 = rng.random_range(40.0..80.0);
    let v = evaluate_objective(&u, &m, t0, &PlantParams::default(), &cfg).unwrap();
    let lp = slack_lp(&v.predicted_t, cfg.x_min, cfg.x_max, cfg.eta_lower, cfg.eta_upper);
    (v.j_cv, lp)
}

/// Optimizer objective and 21-level grid minimum on a random three-step
/// problem. Returns `(solver, grid)`.
pub fn solver_grid_case(seed: u64) -> (f64, f64) {
    use hybrid_rempc::control::{solve_for_disturbance, ControlConfig};
    use hybrid_rempc::plant::PlantParams;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x6121D);
    let cfg = ControlConfig {
        np: 3,
        ..ControlConfig::default()
    };
    let t0 = rng.random_range(50.0..62.0);
    let m: Vec<f64> = (0..3).map(|_| rng.random_range(5.0..65.0)).collect();
    let sol = solve_for_disturbance(t0, &m, &PlantParams::default(), &cfg, None).unwrap();
    let (grid, _) = grid_minimum(3, 21, cfg.u_min, cfg.u_max, &m, t0, cfg.h, cfg.x_min, cfg.eta_lower);
    (sol.j_total, grid)
}

/// Forecast-mean RMSE (g/s) of the kernel-composition forecaster over the
/// next 25 samples, trained on 100 s of noiseless sinusoid ending at `now`.
pub fn kc_pattern_rmse(now: f64, seed: u64) -> f64 {
    use hybrid_rempc::forecast::{kc_forecast, ForecastConfig};
    use hybrid_rempc::gp::GpDataset;
    use hybrid_rempc::scenario::{ScenarioKind, ScenarioSpec};
    let spec = ScenarioSpec {
        kind: ScenarioKind::Sn,
        ..ScenarioSpec::default()
    };
    let cfg = ForecastConfig::default();
    let t = cfg.sample_period;
    let times: Vec<f64> = (0..=cfg.nt).map(|i| now - (cfg.nt - i) as f64 * t).collect();
    let ys: Vec<f64> = times.iter().map(|&s| spec.profile(s).unwrap()).collect();
    let f = kc_forecast(&GpDataset::time_series(&times, &ys).unwrap(), &cfg, None, seed).unwrap();
    let se: f64 = (1..=cfg.np)
        .map(|i| {
            let truth = spec.profile(now + i as f64 * t).unwrap();
            (f.posterior.mean[i - 1] - truth).powi(2)
        })
        .sum();
    (se / cfg.np as f64).sqrt()
}

/// Diagonal posterior over `mean` with the given per-step variances.
pub fn diag_posterior(mean: Vec<f64>, var: Vec<f64>) -> hybrid_rempc::gp::Posterior {
    use nalgebra::{DMatrix, DVector};
    let n = mean.len();
    hybrid_rempc::gp::Posterior {
        mean: DVector::from_vec(mean),
        cov: DMatrix::from_diagonal(&DVector::from_vec(var)),
        query_points: hybrid_rempc::gp::InputGrid::from_scalars(&(1..=n).map(|i| i as f64 * 2.0).collect::<Vec<_>>()),
    }
}

fn sinusoid(n: usize, amp: f64, period: f64, phase: f64) -> Vec<f64> {
    (0..n)
        .map(|i| 35.0 + amp * (2.0 * std::f64::consts::PI * i as f64 * 2.0 / period + phase).sin())
        .collect()
}

fn sample_sd(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// A forecast whose mean has the history's spread but whose variance
/// grows linearly to `rho` times its first-step value, `rho ∈ [2, 20]`.
/// Returns `rho` and the rule's decision.
pub fn variance_growth_case(seed: u64) -> (f64, hybrid_rempc::forecast::SwitchDecision) {
    use hybrid_rempc::forecast::{switch_decide, HybridState};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rho = rng.random_range(2.0..=20.0);
    let v1 = rng.random_range(0.01..10.0);
    let amp = rng.random_range(1.0..20.0);
    let period = rng.random_range(20.0..200.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let history = sinusoid(51, amp, period, phase);
    let raw = sinusoid(25, amp, period, phase);
    let scale = sample_sd(&history) / sample_sd(&raw);
    let mean: Vec<f64> = raw.iter().map(|v| 35.0 + (v - 35.0) * scale).collect();
    let var: Vec<f64> = (0..25).map(|i| v1 * (1.0 + (rho - 1.0) * i as f64 / 24.0)).collect();
    let state = HybridState::new(0.5f64.sqrt(), 1.0, seed).unwrap();
    (rho, switch_decide(&history, &diag_posterior(mean, var), &state))
}

/// A forecast with flat variance whose mean follows a different period and
/// phase than the history, scaled so that `std(history)/std(mean) = r` with
/// `r - 1 > √(δ₁² + 1)` at `δ₁ = √0.5`. Returns the realized ratio and the
/// rule's decision.
pub fn wrong_pattern_case(seed: u64) -> (f64, hybrid_rempc::forecast::SwitchDecision) {
    use hybrid_rempc::forecast::{switch_decide, HybridState};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let margin = (0.5f64 + 1.0).sqrt();
    let r = 1.0 + margin * rng.random_range(1.0..8.0);
    let amp = rng.random_range(1.0..20.0);
    let history = sinusoid(51, amp, rng.random_range(20.0..200.0), rng.random_range(0.0..std::f64::consts::TAU));
    let wrong = sinusoid(25, amp, rng.random_range(20.0..200.0), rng.random_range(0.0..std::f64::consts::TAU));
    let scale = sample_sd(&history) / (r * sample_sd(&wrong));
    let mean: Vec<f64> = wrong.iter().map(|v| 35.0 + (v - 35.0) * scale).collect();
    let var = vec![rng.random_range(0.01..10.0); 25];
    let state = HybridState::new(0.5f64.sqrt(), 1.0, seed).unwrap();
    let realized = sample_sd(&history) / sample_sd(&mean);
    (realized, switch_decide(&history, &diag_posterior(mean, var), &state))
}
