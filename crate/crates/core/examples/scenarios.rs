//! Generates each disturbance scenario, prints a coarse profile and writes
//! the realizations to CSV in the system temp directory.

use hybrid_rempc::scenario::{generate, ScenarioKind, ScenarioSpec};

fn main() -> hybrid_rempc::Result<()> {
    let dir = std::env::temp_dir();
    for kind in [ScenarioKind::Sn, ScenarioKind::Ls, ScenarioKind::Cm, ScenarioKind::Rw] {
        let spec = ScenarioSpec {
            kind,
            seed: 1,
            ..ScenarioSpec::default()
        };
        let trace = generate(&spec)?;
        let coarse: Vec<String> = trace
            .times
            .iter()
            .zip(&trace.true_values)
            .filter(|(t, _)| (**t as i64) % 30 == 0)
            .map(|(t, v)| format!("{t}:{v:.1}"))
            .collect();
        println!("{:<2} {}", kind.as_str(), coarse.join(" "));
        let path = dir.join(format!("scenario_{}.csv", kind.as_str().to_lowercase()));
        trace.write_csv(&path)?;
        println!("   {} samples -> {}", trace.len(), path.display());
    }
    Ok(())
}
