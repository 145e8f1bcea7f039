//! Shape of ε(λ) across sequence lengths: optimum, curvature, basin class.

use ancilla_reset::landscape::{characterize, landscape_report, render_report, sweep_lambda};
use ancilla_reset::reset::LambdaGrid;
use ancilla_reset::su2::generate_sequence;

fn main() -> ancilla_reset::Result<()> {
    let seq = generate_sequence(42, 12)?;
    let curve = sweep_lambda(&seq)?;
    let s = characterize(&curve, 42, 12)?;
    println!(
        "seed 42, L=12: λ*={:.3} ε*={:.4} κ={:.1} minima={} -> {}",
        s.lambda_opt,
        s.epsilon_opt,
        s.kappa,
        s.n_minima,
        s.class.label()
    );
    for (l, e) in curve.lambda.iter().zip(&curve.epsilon).step_by(20) {
        println!("  λ={l:.2}  ε={e:.4}");
    }

    println!();
    let report = landscape_report(42..=61, &[4, 8, 12, 16, 20], LambdaGrid::LANDSCAPE)?;
    print!("{}", render_report(&report));
    Ok(())
}
