//! Bootstrap intervals, paired t-tests, and Holm-Bonferroni adjustment.
//!
//! Intervals are percentile bootstraps of the mean.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const MIN_RESAMPLES: usize = 1_000;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Linear-interpolated quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_ci<R: Rng + ?Sized>(samples: &[f64], level: f64, resamples: usize, stream: &mut R) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid(format!("bootstrap needs at least 2 samples, got {n}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("confidence level {level} outside (0, 1)")));
    }
    if resamples < MIN_RESAMPLES {
        return Err(Error::invalid(format!("at least {MIN_RESAMPLES} resamples required, got {resamples}")));
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return Ok((samples[0], samples[0]));
    }
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| samples[stream.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let m = mean(samples);
    // a finite resample can miss the sample mean on extreme skew; keep it bracketed
    let lo = quantile_sorted(&means, tail).min(m);
    let hi = quantile_sorted(&means, 1.0 - tail).max(m);
    Ok((lo, hi))
}

/// Mean with a 95% bootstrap interval and sample sd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Single samples get a zero-width interval.
pub fn summarize<R: Rng + ?Sized>(samples: &[f64], stream: &mut R) -> Result<Summary> {
    if samples.is_empty() {
        return Err(Error::invalid("cannot summarize an empty sample"));
    }
    let m = mean(samples);
    let (ci_lo, ci_hi) = if samples.len() < 2 {
        (m, m)
    } else {
        bootstrap_ci(samples, 0.95, DEFAULT_RESAMPLES, stream)?
    };
    Ok(Summary {
        n: samples.len(),
        mean: m,
        sd: std_dev(samples),
        ci_lo,
        ci_hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestReport {
    /// Two-sided p-value. For degenerate inputs: 1 when the mean difference is
    /// zero, 0 otherwise.
    pub p_value: f64,
    /// Paired Cohen's d: mean(diff) / sd(diff).
    pub effect_size: f64,
    /// 95% t-interval of the mean difference.
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: usize,
    /// The differences have zero variance; the t statistic is undefined.
    pub degenerate: bool,
}

/// Two-sided paired t-test of `a − b` with `n − 1` degrees of freedom.
pub fn paired_test(a: &[f64], b: &[f64]) -> Result<TestReport> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::invalid("paired test needs at least 2 pairs"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = mean(&diffs);
    let sd = std_dev(&diffs);
    let df = (n - 1) as f64;

    // differences equal up to rounding
    if sd <= 1e-12 * m.abs().max(1.0) || !sd.is_finite() {
        let effect_size = if m > 0.0 {
            f64::INFINITY
        } else if m < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        return Ok(TestReport {
            p_value: if m == 0.0 { 1.0 } else { 0.0 },
            effect_size,
            ci_lo: m,
            ci_hi: m,
            n,
            degenerate: true,
        });
    }

    let se = sd / (n as f64).sqrt();
    let t = m / se;
    let half = student_t_quantile(0.975, df) * se;
    Ok(TestReport {
        p_value: student_t_two_sided(t, df),
        effect_size: m / sd,
        ci_lo: m - half,
        ci_hi: m + half,
        n,
        degenerate: false,
    })
}

fn students_t(df: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, df).expect("degrees of freedom are positive")
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    (2.0 * students_t(df).sf(t.abs())).clamp(0.0, 1.0)
}

pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    students_t(df).cdf(t)
}

/// Inverse CDF by bisection; `statrs`' own inverse loses accuracy at large `df`.
pub fn student_t_quantile(p: f64, df: f64) -> f64 {
    if p < 0.5 {
        return -student_t_quantile(1.0 - p, df);
    }
    let dist = students_t(df);
    let mut hi = 1.0;
    while dist.cdf(hi) < p && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolmDecision {
    pub adjusted: f64,
    pub significant: bool,
}

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Holm step-down adjustment; results are in input order.
pub fn holm_bonferroni(p_values: &[f64], alpha: f64) -> Result<Vec<HolmDecision>> {
    if let Some(bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("p-value {bad} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]).then(i.cmp(&j)));

    let mut out = vec![
        HolmDecision {
            adjusted: 1.0,
            significant: false
        };
        m
    ];
    let mut running: f64 = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        let adj = ((m - rank) as f64 * p_values[idx]).min(1.0);
        running = running.max(adj);
        out[idx] = HolmDecision {
            adjusted: running,
            significant: running <= alpha,
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Domain};

    #[test]
    fn constant_samples_give_point_interval() {
        let mut s = rng::stream(Domain::Bootstrap, &[0]);
        let (lo, hi) = bootstrap_ci(&[0.7; 20], 0.95, 2000, &mut s).unwrap();
        assert_eq!((lo, hi), (0.7, 0.7));
    }

    #[test]
    fn bootstrap_rejects_bad_input() {
        let mut s = rng::stream(Domain::Bootstrap, &[0]);
        assert!(bootstrap_ci(&[1.0], 0.95, 2000, &mut s).is_err());
        assert!(bootstrap_ci(&[1.0, 2.0], 1.0, 2000, &mut s).is_err());
        assert!(bootstrap_ci(&[1.0, 2.0], 0.95, 10, &mut s).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic_per_stream() {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let a = bootstrap_ci(&xs, 0.95, 2000, &mut rng::stream(Domain::Bootstrap, &[5])).unwrap();
        let b = bootstrap_ci(&xs, 0.95, 2000, &mut rng::stream(Domain::Bootstrap, &[5])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equal_samples_are_degenerate() {
        let a = [0.1, 0.5, 0.9];
        let r = paired_test(&a, &a).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.effect_size, 0.0);
        assert_eq!(r.p_value, 1.0);

        let b = [0.0, 0.4, 0.8];
        let r = paired_test(&a, &b).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.effect_size, f64::INFINITY);
    }

    #[test]
    fn paired_test_rejects_mismatched_lengths() {
        assert!(paired_test(&[1.0, 2.0], &[1.0]).is_err());
        assert!(paired_test(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn holm_examples() {
        let r = holm_bonferroni(&[0.04], 0.05).unwrap();
        assert!(r[0].significant);

        let r = holm_bonferroni(&[0.01, 0.04], 0.05).unwrap();
        assert!((r[0].adjusted - 0.02).abs() < 1e-15);
        assert!((r[1].adjusted - 0.04).abs() < 1e-15);
        assert!(r.iter().all(|d| d.significant));

        let r = holm_bonferroni(&[1.0; 4], 0.05).unwrap();
        assert!(r.iter().all(|d| !d.significant));

        // input order is preserved
        let r = holm_bonferroni(&[0.04, 0.01], 0.05).unwrap();
        assert!((r[0].adjusted - 0.04).abs() < 1e-15);
        assert!((r[1].adjusted - 0.02).abs() < 1e-15);

        assert!(holm_bonferroni(&[1.2], 0.05).is_err());
    }

    #[test]
    fn t_tail_known_values() {
        // df = 1 is Cauchy: P(|T| > 1) = 1/2
        assert!((student_t_two_sided(1.0, 1.0) - 0.5).abs() < 1e-12);
        // df = 2 has closed form 1 − |t| / sqrt(2 + t²)
        for t in [0.3, 1.0, 2.5, 7.0] {
            let exact = 1.0 - t / (2.0f64 + t * t).sqrt();
            assert!((student_t_two_sided(t, 2.0) - exact).abs() < 1e-12);
        }
        assert!((student_t_quantile(0.975, 1e6) - 1.959964).abs() < 1e-4);
    }
}
