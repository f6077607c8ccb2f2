//! Solves one robust economic MPC problem against a forecast envelope and
//! prints the heater plan and the predicted worst-case temperatures.

use hybrid_rempc::control::{solve_rempc, ControlConfig, DisturbanceMode};
use hybrid_rempc::forecast::{envelope_from_posterior, ConfidenceSpec};
use hybrid_rempc::gp::{InputGrid, Posterior};
use hybrid_rempc::plant::PlantParams;
use nalgebra::{DMatrix, DVector};

fn main() -> hybrid_rempc::Result<()> {
    let cfg = ControlConfig::default();
    let np = cfg.np;
    let mean: Vec<f64> = (0..np).map(|i| 35.0 + 10.0 * (i as f64 * 0.2).sin()).collect();
    let var: Vec<f64> = (0..np).map(|i| 1.0 + 0.2 * i as f64).collect();
    let post = Posterior {
        mean: DVector::from_vec(mean),
        cov: DMatrix::from_diagonal(&DVector::from_vec(var)),
        query_points: InputGrid::from_scalars(&(1..=np).map(|i| 2.0 * i as f64).collect::<Vec<_>>()),
    };
    let env = envelope_from_posterior(&post, ConfidenceSpec::new(0.95)?);
    let sol = solve_rempc(56.0, &env, &DisturbanceMode::RobustUpper, &PlantParams::default(), &cfg, None)?;
    println!("J = {:.4} (economic {:.4}, violation {:.4}), {} passes", sol.j_total, sol.j_ec, sol.j_cv, sol.solver_iterations);
    for k in (0..np).step_by(4) {
        println!(
            "step {:>2}: inflow ≤ {:>6.2} g/s  u = {:.3} kW  T = {:.3} °C",
            k + 1,
            env.upper[k],
            sol.u_seq[k],
            sol.predicted_t[k]
        );
    }
    Ok(())
}
