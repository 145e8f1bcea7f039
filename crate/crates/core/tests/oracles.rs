use std::f64::consts::PI;

use ancilla_reset::stats::{holm_bonferroni, paired_test, student_t_cdf, student_t_quantile, student_t_two_sided};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn t_cdf_matches_closed_forms() {
    for i in -200..=200 {
        let t = i as f64 / 10.0;
        // df = 1 is Cauchy; df = 2 and df = 3 have elementary CDFs
        let cauchy = 0.5 + t.atan() / PI;
        let two = 0.5 + t / (2.0 * (2.0 + t * t).sqrt());
        let x = t / 3f64.sqrt();
        let three = 0.5 + ((x / (1.0 + x * x)) + x.atan()) / PI;
        assert!((student_t_cdf(t, 1.0) - cauchy).abs() < 1e-10, "df=1 t={t}");
        assert!((student_t_cdf(t, 2.0) - two).abs() < 1e-10, "df=2 t={t}");
        assert!((student_t_cdf(t, 3.0) - three).abs() < 1e-10, "df=3 t={t}");
        assert!((student_t_two_sided(t, 2.0) - 2.0 * (1.0 - 0.5 - t.abs() / (2.0 * (2.0 + t * t).sqrt()))).abs() < 1e-10);
    }
}

#[test]
fn t_quantiles_match_printed_tables() {
    // two-sided 95% and 99% critical values
    let table = [
        (1.0, 12.7062, 63.6567),
        (4.0, 2.7764, 4.6041),
        (9.0, 2.2622, 3.2498),
        (19.0, 2.0930, 2.8609),
        (49.0, 2.0096, 2.6800),
        (1e7, 1.9600, 2.5758),
    ];
    for (df, c95, c99) in table {
        assert!((student_t_quantile(0.975, df) - c95).abs() < 5e-4, "df={df}");
        assert!((student_t_quantile(0.995, df) - c99).abs() < 5e-4, "df={df}");
        assert!((student_t_quantile(0.025, df) + c95).abs() < 5e-4, "df={df}");
        assert!((student_t_cdf(student_t_quantile(0.9, df), df) - 0.9).abs() < 1e-9);
    }
}

#[test]
fn paired_test_matches_a_direct_computation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [2usize, 3, 4, 5, 20, 50] {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.6..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..0.9)).collect();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let m = d.iter().sum::<f64>() / n as f64;
        let sd = (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let t = m / (sd / (n as f64).sqrt());
        let p = match n - 1 {
            1 => 1.0 - 2.0 * t.abs().atan() / PI,
            2 => 1.0 - t.abs() / (2.0 + t * t).sqrt(),
            3 => {
                let x = t.abs() / 3f64.sqrt();
                1.0 - 2.0 * ((x / (1.0 + x * x)) + x.atan()) / PI
            }
            df => student_t_two_sided(t, df as f64),
        };
        let half = student_t_quantile(0.975, (n - 1) as f64) * sd / (n as f64).sqrt();

        let r = paired_test(&a, &b).unwrap();
        assert_eq!(r.n, n);
        assert!((r.p_value - p).abs() < 1e-9, "n={n}: {} vs {p}", r.p_value);
        assert!((r.effect_size - m / sd).abs() < 1e-12);
        assert!((r.ci_lo - (m - half)).abs() < 1e-6 && (r.ci_hi - (m + half)).abs() < 1e-6);
    }
}

#[test]
fn holm_matches_hand_computation() {
    // sorted 0.01, 0.02, 0.03, 0.04 → 0.04, 0.06, 0.06, 0.06 (running max)
    let adj = holm_bonferroni(&[0.04, 0.01, 0.03, 0.02], 0.05).unwrap();
    let got: Vec<f64> = adj.iter().map(|d| d.adjusted).collect();
    let want = [0.06, 0.04, 0.06, 0.06];
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "{got:?}");
    }
    assert_eq!(adj.iter().map(|d| d.significant).collect::<Vec<_>>(), [false, true, false, false]);
}
