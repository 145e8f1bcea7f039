//! Crossover length per platform, and how external feedback moves it.

use ancilla_reset::latency::{crossover, crossover_table, decide, ext_sweep, format_duration, render_crossover_table};
use ancilla_reset::noise::PlatformProfile;

fn main() -> ancilla_reset::Result<()> {
    let profiles = PlatformProfile::native();
    print!("{}", render_crossover_table(&crossover_table(&profiles)?));

    let iqm = PlatformProfile::iqm();
    let ts: Vec<f64> = (0..=5).map(|i| i as f64 * 2e-6).collect();
    println!("\nIQM with external feedback");
    for (t, l) in ext_sweep(&iqm, &ts)? {
        println!("  t_ext={:>8}  L*={l}", format_duration(t));
    }

    println!("\npolicy at F_req = 0.75");
    for p in &profiles {
        let l_star = crossover(p)?;
        for (length, f) in [(4, 0.88), (l_star.max(2) - 1, 0.70), (l_star + 1, 0.90)] {
            let d = decide(length, f, 0.75, p)?;
            println!("  {:<8} L={length:<3} F={f:.2} -> {} ({})", p.name, d.chosen.label(), d.reason);
        }
    }
    Ok(())
}
