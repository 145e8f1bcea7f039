//! Writes a benchmark CSV with its manifest, reads both back, and checks that
//! nothing was lost.

use ancilla_reset::bench_io::{read_rows, RunManifest};
use ancilla_reset::sweep::{run_sweep, write_sweep, SweepConfig};
use chrono::Utc;

fn main() -> ancilla_reset::Result<()> {
    let cfg = SweepConfig {
        seeds: 42..=44,
        lengths: vec![4, 8],
        shots: 256,
        ..SweepConfig::default()
    };
    let outcomes = run_sweep(&cfg, None)?;
    let dir = std::env::temp_dir().join(format!("ancilla-reset-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| ancilla_reset::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("results.csv");

    let written = write_sweep(&cfg, &outcomes, &path, Utc::now())?;
    let rows = read_rows(&path)?;
    let manifest = RunManifest::read(&RunManifest::sidecar_path(&path))?;
    println!("{} rows -> {}", rows.len(), path.display());
    println!("hash {} verified={} matches={}", manifest.config_hash, manifest.verify(), manifest == written);
    for r in rows.iter().take(4) {
        println!("  {}", r.record_without_timestamp().join(","));
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
