//! Integrates the tank-heater model under constant heating and a step in
//! the inflow, and compares RK4 step sizes against the exact solution.

use hybrid_rempc::plant::{rk4_step, simulate, temperature_derivative, PlantParams};

fn main() {
    let p = PlantParams::default();
    let mut flows = vec![0.030; 30];
    flows[15..].iter_mut().for_each(|m| *m = 0.045);
    let temps = simulate(&p, 55.0, &[5.0; 30], &flows, 2.0);
    for (k, t) in temps.iter().enumerate().step_by(3) {
        println!("t = {:>3} s  inflow {:>5.3} kg/s  T = {:.3} °C", 2 * (k + 1), flows[k], t);
    }

    // Exact solution of the linear model under constant inputs.
    let (q, m, t0, span) = (5.0, 0.03, 40.0, 20.0);
    let b = (m * p.cp + p.u_total) / (p.mass * p.cp);
    let a = (q + m * p.cp * p.t_inlet + p.u_total * p.t_amb) / (p.mass * p.cp);
    let exact = a / b + (t0 - a / b) * (-b * span).exp();
    for h in [4.0, 2.0, 1.0] {
        let mut t = t0;
        for _ in 0..(span / h) as usize {
            t = rk4_step(&p, t, q, m, h);
        }
        println!("h = {h} s: error {:.3e}", (t - exact).abs());
    }
    println!("dT/dt at 55 °C, 5 kW, 30 g/s: {:.4} °C/s", temperature_derivative(&p, 55.0, 5.0, 0.030));
}
