use std::f64::consts::PI;

use ancilla_reset::bench_io::{aggregate, format_float, quantize, read_rows_from, ResultRow, RowWriter};
use ancilla_reset::config::{parse_seed_range, parse_usize_list};
use ancilla_reset::latency::{blind_is_faster, crossover, decide};
use ancilla_reset::noise::{depolarize, thermal_relax, DensityMatrix, PlatformProfile};
use ancilla_reset::qec::matching::mwpm_proxy_decode;
use ancilla_reset::qec::threshold::threshold_table;
use ancilla_reset::qec::{majority_vote_decode, syndrome_noise};
use ancilla_reset::reset::{envelope, optimize_lambda, reset_state, LambdaGrid, ResetMethod};
use ancilla_reset::stats::holm_bonferroni;
use ancilla_reset::su2::{compose, residual_error, scale_and_double, Axis, Gate, GateSequence, Unitary, UNITARY_TOL};
use chrono::{TimeZone, Utc};
use proptest::prelude::*;

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

fn sequence(max_len: usize) -> impl Strategy<Value = GateSequence> {
    prop::collection::vec((axis(), 0.0..2.0 * PI), 1..=max_len).prop_map(|gs| {
        let gates = gs.into_iter().map(|(a, t)| Gate::new(a, t).unwrap()).collect();
        GateSequence::from_gates(0, gates).unwrap()
    })
}

fn bloch_state() -> impl Strategy<Value = DensityMatrix> {
    (0.0..=1.0f64, 0.0..PI, 0.0..2.0 * PI).prop_map(|(r, th, ph)| {
        DensityMatrix::from_bloch(r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos())
    })
}

fn profile() -> impl Strategy<Value = PlatformProfile> {
    (1e-9..1e-6f64, 1e-7..1e-4f64, 0.0..5e-6f64).prop_map(|(t_gate, t_meas, t_ext)| PlatformProfile {
        t_gate,
        t_meas_total: t_meas,
        t_ext,
        ..PlatformProfile::iqm()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn composed_sequences_stay_unitary(seq in sequence(24), lambda in 0.1..4.0f64) {
        prop_assert!(compose(&seq).is_unitary(UNITARY_TOL));
        prop_assert!(scale_and_double(&seq, lambda).unwrap().is_unitary(UNITARY_TOL));
    }

    #[test]
    fn residual_is_bounded(seq in sequence(24), lambda in 0.1..4.0f64) {
        let r = scale_and_double(&seq, lambda).unwrap();
        let eps = residual_error(&r, &compose(&seq)).unwrap();
        prop_assert!((0.0..=2f64.sqrt() + 1e-12).contains(&eps));
    }

    #[test]
    fn inverse_closes_exactly(seq in sequence(16)) {
        let u = compose(&seq);
        let eps = residual_error(&u.dagger(), &u).unwrap();
        prop_assert!(eps < 1e-12);
    }

    #[test]
    fn fitted_lambda_is_grid_optimal(seq in sequence(8)) {
        let grid = LambdaGrid::BENCHMARK;
        let fit = optimize_lambda(&seq, grid).unwrap();
        let u = compose(&seq);
        for l in grid.values() {
            let eps = residual_error(&scale_and_double(&seq, l).unwrap(), &u).unwrap();
            prop_assert!(fit.epsilon <= eps + 1e-12);
        }
    }

    #[test]
    fn channels_preserve_states(rho in bloch_state(), p in 0.0..=1.0f64, t1 in 1e-6..1e-3f64, frac in 0.0..=2.0f64, dt in 0.0..1e-4f64) {
        let t2 = frac * t1;
        prop_assume!(t2 > 0.0);
        let d = depolarize(&rho, p).unwrap();
        prop_assert!(d.is_valid());
        let r = thermal_relax(&d, t1, t2, dt).unwrap();
        prop_assert!(r.is_valid());
        prop_assert!((r.trace() - 1.0).abs() < 1e-12);
        // relaxation never lowers the ground population
        prop_assert!(r.p0() >= d.p0() - 1e-12);
    }

    #[test]
    fn reset_states_are_valid(seq in sequence(12)) {
        let profile = PlatformProfile::iqm();
        let fit = optimize_lambda(&seq, LambdaGrid::BENCHMARK).unwrap();
        for m in ResetMethod::ALL {
            let rho = reset_state(&seq, m, &profile, Some(&fit)).unwrap();
            prop_assert!(rho.is_valid());
        }
    }

    #[test]
    fn envelope_is_a_probability_and_decays(eps in 0.0..1.5f64, p in 0.0..0.1f64, l in 1usize..64) {
        let e = envelope(eps, p, l);
        prop_assert!((0.0..=1.0).contains(&e));
        let later = envelope(eps, p, l + 1);
        prop_assert!((later - 0.5).abs() <= (e - 0.5).abs() + 1e-15);
    }

    #[test]
    fn crossover_separates_fast_and_slow(p in profile()) {
        let l = crossover(&p).unwrap();
        if l > 0 {
            prop_assert!(blind_is_faster(l, &p));
        }
        prop_assert!(!blind_is_faster(l + 1, &p));
    }

    #[test]
    fn decision_is_consistent(p in profile(), l in 1usize..200, f in 0.0..=1.0f64, f_req in 0.0..=1.0f64) {
        let d = decide(l, f, f_req, &p).unwrap();
        let blind = blind_is_faster(l, &p) && f >= f_req;
        prop_assert_eq!(d.chosen == ResetMethod::BlindReset, blind);
    }

    #[test]
    fn holm_dominates_raw_p_values(ps in prop::collection::vec(0.0..=1.0f64, 1..20)) {
        let adj = holm_bonferroni(&ps, 0.05).unwrap();
        for (p, a) in ps.iter().zip(&adj) {
            prop_assert!(a.adjusted >= *p && a.adjusted <= 1.0);
        }
        // adjusted values keep the order of the raw ones
        for i in 0..ps.len() {
            for j in 0..ps.len() {
                if ps[i] < ps[j] {
                    prop_assert!(adj[i].adjusted <= adj[j].adjusted);
                }
            }
        }
    }

    #[test]
    fn syndrome_noise_falls_with_cleanliness(f in 0.0..=1.0f64, g in 0.0..=1.0f64, p in 0.0..0.1f64) {
        prop_assume!(f < g);
        prop_assert!(syndrome_noise(g, p) <= syndrome_noise(f, p));
    }

    #[test]
    fn majority_vote_matches_count(bits in prop::collection::vec(any::<bool>(), 1..15)) {
        prop_assume!(bits.len() % 2 == 1);
        let ones = bits.iter().filter(|&&b| b).count();
        prop_assert_eq!(majority_vote_decode(&bits).unwrap(), 2 * ones > bits.len());
    }

    #[test]
    fn matching_correction_clears_space_defects(d in prop::sample::select(vec![3usize, 5, 7]), flips in prop::collection::vec(any::<bool>(), 7)) {
        // a static data error seen in one perfect round is undone by the correction
        let data = &flips[..d];
        let row: Vec<bool> = (0..d - 1).map(|i| data[i] ^ data[i + 1]).collect();
        let out = mwpm_proxy_decode(&[row], d).unwrap();
        let fixed: Vec<bool> = data.iter().zip(&out.correction).map(|(a, b)| a ^ b).collect();
        prop_assert!(fixed.iter().all(|&b| b == fixed[0]));
    }

    #[test]
    fn threshold_rows_are_monotone(f in 0.5..1.0f64, g in 0.5..1.0f64) {
        prop_assume!(f > g);
        let rows = vec![("a".to_string(), f), ("b".to_string(), g)];
        let t = threshold_table(1e-3, 0.02, 0.029, &rows, &[3, 5, 7]).unwrap();
        prop_assert!((t[0].at(3).unwrap() - 1.0).abs() < 1e-12);
        for d in [3, 5, 7] {
            prop_assert!(t[1].at(d).unwrap() >= t[0].at(d).unwrap());
        }
        // below threshold, distance helps
        prop_assert!(t[1].at(7).unwrap() < t[1].at(3).unwrap());
    }

    #[test]
    fn floats_round_trip_through_text(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let q = quantize(x);
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), q);
        prop_assert_eq!(quantize(q), q);
    }

    #[test]
    fn seed_ranges_parse(a in 0u64..10_000, n in 0u64..1000) {
        let r = parse_seed_range(&format!("{a}..{}", a + n)).unwrap();
        prop_assert_eq!((*r.start(), *r.end()), (a, a + n));
    }

    #[test]
    fn stepped_lists_parse(a in 1usize..50, n in 0usize..20, step in 1usize..5) {
        let v = parse_usize_list(&format!("{a}..{}:{step}", a + n * step)).unwrap();
        prop_assert_eq!(v, (0..=n).map(|i| a + i * step).collect::<Vec<_>>());
    }
}

fn rows_from(values: &[(usize, usize, u64, usize, f64)]) -> Vec<ResultRow> {
    let backends = ["IQM", "Rigetti", "IonQ"];
    let ts = Utc.with_ymd_and_hms(2026, 3, 1, 12, 0, 0).unwrap();
    values
        .iter()
        .map(|&(b, m, seed, l, p)| {
            let method = ResetMethod::ALL[m];
            ResultRow {
                backend: backends[b].into(),
                method,
                seed,
                sequence_length: l,
                p_zero: p,
                p_x: 0.5,
                unitary_error: 0.1,
                lambda_used: (method == ResetMethod::BlindReset).then_some(1.0),
                shots: 1024,
                timestamp: ts,
            }
            .quantized()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aggregation_ignores_row_order(
        values in prop::collection::vec((0usize..3, 0usize..3, 42u64..46, prop::sample::select(vec![4usize, 8]), 0.0..=1.0f64), 2..40),
        shuffle in any::<u64>(),
    ) {
        let rows = rows_from(&values);
        let mut permuted = rows.clone();
        let mut state = shuffle | 1;
        for i in (1..permuted.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            permuted.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let mut keys: Vec<_> = values.iter().map(|v| (v.0, v.1, v.2, v.3)).collect();
        keys.sort();
        keys.dedup();
        let a = aggregate(&rows, &[], 0.75);
        let b = aggregate(&permuted, &[], 0.75);
        if keys.len() < values.len() {
            // duplicated tuples are rejected whatever the order
            prop_assert!(a.is_err() && b.is_err());
        } else {
            prop_assert_eq!(a.unwrap(), b.unwrap());
        }
    }

    #[test]
    fn rows_round_trip(values in prop::collection::vec((0usize..3, 0usize..3, 0u64..100, 1usize..30, 0.0..=1.0f64), 0..50)) {
        let rows = rows_from(&values);
        let mut w = RowWriter::new(Vec::new()).unwrap();
        for r in &rows {
            w.write(r).unwrap();
        }
        let bytes = w.finish().unwrap();
        let back = read_rows_from(bytes.as_slice(), std::path::Path::new("<mem>")).unwrap();
        prop_assert_eq!(back, rows);
    }
}

#[test]
fn identity_has_zero_residual() {
    assert_eq!(residual_error(&Unitary::identity(), &Unitary::identity()).unwrap(), 0.0);
}
