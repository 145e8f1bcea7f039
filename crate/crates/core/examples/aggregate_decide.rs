//! Benchmark rows from three backends through the three aggregation passes,
//! then the deployment decision matrix.

use ancilla_reset::bench_io::{aggregate, decision_matrix, render_aggregate, render_decision_matrix, ResultRow};
use ancilla_reset::noise::PlatformProfile;
use ancilla_reset::sweep::{run_sweep, SweepConfig};
use chrono::Utc;

fn main() -> ancilla_reset::Result<()> {
    let cfg = SweepConfig {
        seeds: 42..=51,
        lengths: vec![4, 8, 12],
        shots: 1024,
        ..SweepConfig::default()
    };
    let now = Utc::now();
    let rows: Vec<ResultRow> = run_sweep(&cfg, None)?.iter().map(|o| ResultRow::from_outcome(o, now)).collect();

    let report = aggregate(&rows, &PlatformProfile::native(), 0.75)?;
    print!("{}", render_aggregate(&report));
    println!();
    print!("{}", render_decision_matrix(&decision_matrix(&report, 0.75, None)));
    Ok(())
}
