//! Compares a subset of controllers on two seeds of the level-shift
//! scenario over a shortened run.

use hybrid_rempc::harness::{compare_controllers, ControllerKind, SimConfig};
use hybrid_rempc::scenario::ScenarioKind;

fn main() -> hybrid_rempc::Result<()> {
    let mut cfg = SimConfig {
        duration: 100.0,
        ..SimConfig::default()
    };
    cfg.scenario.kind = ScenarioKind::Ls;
    let lineup = [
        ControllerKind::Perfect,
        ControllerKind::FixedRange,
        ControllerKind::Kc,
        ControllerKind::Hybrid,
    ];
    let table = compare_controllers(&cfg, &lineup, &[0, 1])?;
    println!("{:<11} {:>10} {:>9} {:>10}", "controller", "objective", "sd", "vs perfect");
    for r in &table.rows {
        println!(
            "{:<11} {:>10.4} {:>9.4} {:>10.3}",
            r.controller,
            r.mean[0],
            r.sd[0],
            r.normalized_objective.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
