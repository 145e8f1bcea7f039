//! Advantage of blind reset over no reset across the (T1, T2) plane.

use ancilla_reset::latency::format_duration;
use ancilla_reset::sweep::{coherence_sweep, CoherenceConfig};

fn main() -> ancilla_reset::Result<()> {
    let cfg = CoherenceConfig::default();
    let cells = coherence_sweep(&cfg, None)?;

    print!("{:>11}", "T1\\T2");
    for t2 in &cfg.t2 {
        print!(" {:>11}", format_duration(*t2));
    }
    println!();
    for t1 in &cfg.t1 {
        print!("{:>11}", format_duration(*t1));
        for c in cells.iter().filter(|c| c.t1 == *t1) {
            match c.advantage() {
                Some(a) => print!(" {a:>+11.3}"),
                None => print!(" {:>11}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
