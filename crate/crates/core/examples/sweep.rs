//! Doubles the training horizon of the hybrid controllers on the
//! changing-mean scenario over a shortened run.

use hybrid_rempc::harness::{sweep_training_horizon, SimConfig};
use hybrid_rempc::scenario::ScenarioKind;

fn main() -> hybrid_rempc::Result<()> {
    let mut cfg = SimConfig {
        duration: 60.0,
        ..SimConfig::default()
    };
    cfg.scenario.kind = ScenarioKind::Cm;
    let table = sweep_training_horizon(&cfg, &[1, 2], &[0])?;
    for r in &table.rows {
        println!(
            "factor {} ({} samples) {:<9} objective {:.4}  relative {:.3}",
            r.factor, r.nt, r.controller, r.avg_objective, r.normalized
        );
    }
    Ok(())
}
