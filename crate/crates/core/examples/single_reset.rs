//! One random sequence on the IQM profile: fit λ offline, then compare the
//! three reset policies on the same noisy state.

use ancilla_reset::noise::PlatformProfile;
use ancilla_reset::reset::{envelope, optimize_lambda, run_reset_cycle, LambdaGrid, ResetMethod};
use ancilla_reset::rng::{self, Domain};
use ancilla_reset::su2::{compose, generate_sequence, residual_error, Unitary};

fn main() -> ancilla_reset::Result<()> {
    let profile = PlatformProfile::iqm();
    let seq = generate_sequence(42, 8)?;
    for g in seq.gates() {
        println!("  R_{:?}({:+.3})", g.axis(), g.angle());
    }

    let fit = optimize_lambda(&seq, LambdaGrid::BENCHMARK)?;
    let bare = residual_error(&compose(&seq), &Unitary::identity())?;
    println!("bare residual {bare:.4}, blind residual {:.4} at λ = {:.3}", fit.epsilon, fit.lambda);

    let mut stream = rng::stream(Domain::ShotsZ, &[42, 8]);
    for method in ResetMethod::ALL {
        let o = run_reset_cycle(&seq, method, &profile, 4096, Some(&fit), &mut stream)?;
        println!("{:<18} p_zero={:.4}  p_x={:.4}", method.label(), o.p_zero, o.p_x);
    }
    println!(
        "envelope for the blind row: {:.4}",
        envelope(fit.epsilon, profile.gate_error_p, seq.len())
    );
    Ok(())
}
