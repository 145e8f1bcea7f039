//! Logical error extrapolated from the effective physical error, normalized
//! to measurement reset at d = 3.

use ancilla_reset::qec::threshold::{
    default_rows, effective_error, render_threshold_table, threshold_table, DEFAULT_DISTANCES, DEFAULT_ETA,
    DEFAULT_P_TH,
};

fn main() -> ancilla_reset::Result<()> {
    let rows = default_rows();
    print!(
        "{}",
        render_threshold_table(&threshold_table(1e-3, DEFAULT_ETA, DEFAULT_P_TH, &rows, &DEFAULT_DISTANCES)?)
    );

    println!("\neffective error per policy");
    for (label, f) in &rows {
        println!("  {label:<18} f={f:.2}  p_eff={:.2e}", effective_error(1e-3, *f, DEFAULT_ETA));
    }
    Ok(())
}
