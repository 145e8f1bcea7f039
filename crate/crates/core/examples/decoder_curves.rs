//! Logical error after 20 syndrome cycles for each reset policy, at d = 3 and
//! d = 5, under both decoders.

use std::time::Instant;

use ancilla_reset::qec::{fixed_cleanliness, logical_error_curve, Decoder, RepCodeConfig};
use ancilla_reset::reset::ResetMethod;

fn main() -> ancilla_reset::Result<()> {
    let policies = [ResetMethod::MeasurementReset, ResetMethod::BlindReset, ResetMethod::NoReset];
    for decoder in Decoder::ALL {
        println!("{decoder}");
        for d in [3, 5] {
            for method in policies {
                let f = fixed_cleanliness(method, 4)?;
                let cfg = RepCodeConfig::new(d, 20, 1e-3, method, f)?.with_decoder(decoder);
                let start = Instant::now();
                let run = logical_error_curve(&cfg)?;
                let p = run.final_point();
                println!(
                    "  d={d} {:<18} f={f:.2}  p_L={:.4}  [{:.4}, {:.4}]  ({:.1?})",
                    method.label(),
                    p.logical_error,
                    p.ci_lo,
                    p.ci_hi,
                    start.elapsed()
                );
            }
        }
    }
    Ok(())
}
