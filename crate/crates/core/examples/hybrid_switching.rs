//! Steps the hybrid forecaster through the level-shift scenario and prints
//! which method it used and why, every 20 s.

use hybrid_rempc::forecast::{hybrid_forecast, ForecastConfig, HybridState};
use hybrid_rempc::gp::GpDataset;
use hybrid_rempc::scenario::{generate, ScenarioKind, ScenarioSpec};

fn main() -> hybrid_rempc::Result<()> {
    let cfg = ForecastConfig::default();
    let spec = ScenarioSpec {
        kind: ScenarioKind::Ls,
        start_time: -200.0,
        end_time: 600.0,
        seed: 2,
        ..ScenarioSpec::default()
    };
    let trace = generate(&spec)?;
    let n = cfg.required_history_len();
    let mut state = HybridState::new(0.5f64.sqrt(), 1.0, 2)?;
    let start = trace.position(200.0, 1e-9).expect("grid point");
    for k in (start..start + 200).step_by(10) {
        let history = GpDataset::time_series(&trace.times[k + 1 - n..=k], &trace.measured_values[k + 1 - n..=k])?;
        let f = hybrid_forecast(&history, &cfg, &state)?;
        let d = f.decision;
        println!(
            "t = {:>5}: {:<3}  std stat {:>7.3}{}  var stat {:>7.3}{}",
            trace.times[k],
            d.choice.as_str(),
            d.std_ratio_stat,
            if d.std_fail { "*" } else { " " },
            d.var_ratio_stat,
            if d.var_fail { "*" } else { " " },
        );
        state = f.state;
    }
    println!("(* marks a failed test; thresholds {:.3} and {:.3})", state.delta1.powi(2), state.delta2.powi(2));
    Ok(())
}
