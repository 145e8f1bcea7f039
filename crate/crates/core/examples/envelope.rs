//! Blind-reset rows screened against the coherent/incoherent envelope.

use ancilla_reset::noise::PlatformProfile;
use ancilla_reset::reset::{envelope, ResetMethod, DEFAULT_ENVELOPE_MARGIN};
use ancilla_reset::sweep::{envelope_screen, run_sweep, SweepConfig};

fn main() -> ancilla_reset::Result<()> {
    let cfg = SweepConfig {
        backends: PlatformProfile::native(),
        methods: vec![ResetMethod::BlindReset],
        seeds: 42..=51,
        lengths: vec![4, 12, 20],
        shots: 1024,
        ..SweepConfig::default()
    };
    let outcomes = run_sweep(&cfg, None)?;
    for o in outcomes.iter().filter(|o| o.seed == 42) {
        let p = cfg.backends.iter().find(|b| b.name == o.backend).expect("backend in config");
        println!(
            "{:<8} L={:<3} ε={:.3}  p_zero={:.3}  envelope={:.3}",
            o.backend,
            o.sequence_length,
            o.unitary_error,
            o.p_zero,
            envelope(o.unitary_error, p.gate_error_p, o.sequence_length)
        );
    }
    let screen = envelope_screen(&outcomes, &cfg.backends, DEFAULT_ENVELOPE_MARGIN)?;
    println!(
        "\n{}/{} rows above envelope + {DEFAULT_ENVELOPE_MARGIN} ({:.0}%), max excess {:.3}",
        screen.violations,
        screen.blind_rows,
        100.0 * screen.fraction(),
        screen.max_excess
    );
    Ok(())
}
