//! Reduced benchmark on one backend: cleanliness per policy and length, with
//! Holm-adjusted paired tests of blind reset against no reset.

use ancilla_reset::noise::PlatformProfile;
use ancilla_reset::reset::ResetMethod;
use ancilla_reset::stats::mean;
use ancilla_reset::sweep::{p_zero_by_seed, paired_comparisons, run_sweep, SweepConfig};

fn main() -> ancilla_reset::Result<()> {
    let cfg = SweepConfig {
        backends: vec![PlatformProfile::iqm()],
        seeds: 42..=61,
        lengths: vec![4, 8, 12, 16, 20],
        shots: 1024,
        ..SweepConfig::default()
    };
    let outcomes = run_sweep(&cfg, None)?;

    println!("{:<18} {}", "method", cfg.lengths.iter().map(|l| format!("{:>7}", format!("L={l}"))).collect::<String>());
    for &m in &cfg.methods {
        let cells: String = cfg
            .lengths
            .iter()
            .map(|&l| {
                let v: Vec<f64> = p_zero_by_seed(&outcomes, "IQM", m, l).into_iter().map(|x| x.1).collect();
                format!("{:>7.3}", mean(&v))
            })
            .collect();
        println!("{:<18} {cells}", m.label());
    }

    println!("\nblind - no_reset");
    for c in paired_comparisons(&outcomes, "IQM", ResetMethod::BlindReset, ResetMethod::NoReset, &cfg.lengths)? {
        println!(
            "  L={:<3} Δ={:+.3}  d={:+.2}  p={:.2e}  holm={:.2e} {}",
            c.length,
            c.mean_a - c.mean_b,
            c.report.effect_size,
            c.report.p_value,
            c.holm.adjusted,
            if c.holm.significant { "*" } else { "" }
        );
    }
    Ok(())
}
