//! Closed-form timing of the two reset paths.
//!
//! Blind reset costs `2 L t_gate`; measurement reset costs the aggregated
//! native path plus any external feedback term. The crossover `L*` is the
//! largest length at which blind reset is strictly faster.

use std::fmt;

use crate::error::{Error, Result};
use crate::noise::PlatformProfile;
use crate::reset::ResetMethod;

/// Relative slack used when a latency ratio lands on an integer.
const RATIO_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyBreakdown {
    pub profile_name: String,
    pub length: usize,
    pub t_blind: f64,
    pub t_meas: f64,
}

impl LatencyBreakdown {
    pub fn new(length: usize, profile: &PlatformProfile) -> Self {
        LatencyBreakdown {
            profile_name: profile.name.clone(),
            length,
            t_blind: blind_latency(length, profile),
            t_meas: measurement_latency(profile),
        }
    }
}

pub fn blind_latency(length: usize, profile: &PlatformProfile) -> f64 {
    2.0 * length as f64 * profile.t_gate
}

pub fn measurement_latency(profile: &PlatformProfile) -> f64 {
    profile.t_meas_total + profile.t_ext
}

/// `T_meas / (2 t_gate)`, snapped to the nearest integer when within rounding.
fn break_even(profile: &PlatformProfile) -> f64 {
    let ratio = measurement_latency(profile) / (2.0 * profile.t_gate);
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= RATIO_SNAP * ratio.max(1.0) {
        nearest
    } else {
        ratio
    }
}

/// True when `2 L t_gate < T_meas`.
pub fn blind_is_faster(length: usize, profile: &PlatformProfile) -> bool {
    (length as f64) < break_even(profile)
}

/// `max{L ≥ 0 : 2 L t_gate < T_meas}`.
pub fn crossover(profile: &PlatformProfile) -> Result<usize> {
    if !(profile.t_gate > 0.0) {
        return Err(Error::invalid("crossover requires t_gate > 0"));
    }
    let ratio = break_even(profile);
    let l_star = if ratio.fract() == 0.0 { ratio - 1.0 } else { ratio.floor() };
    Ok(l_star.max(0.0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionReason {
    FasterAndClean,
    /// Blind reset is not faster at this length.
    TooSlow,
    /// Faster, but not clean enough even at the shortest length.
    TooDirty,
    /// Faster, but not clean enough; a shorter sequence may qualify.
    RestrictLength,
}

impl DecisionReason {
    pub fn label(&self) -> &'static str {
        match self {
            DecisionReason::FasterAndClean => "faster_and_clean",
            DecisionReason::TooSlow => "too_slow",
            DecisionReason::TooDirty => "too_dirty",
            DecisionReason::RestrictLength => "restrict_length",
        }
    }
}

impl fmt::Display for DecisionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyDecision {
    pub chosen: ResetMethod,
    pub reason: DecisionReason,
}

/// Blind reset iff it is strictly faster and `f_clean ≥ f_req`; timing is
/// checked first.
pub fn decide(length: usize, f_clean: f64, f_req: f64, profile: &PlatformProfile) -> Result<PolicyDecision> {
    if !(0.0..=1.0).contains(&f_req) {
        return Err(Error::invalid(format!("f_req = {f_req} outside [0, 1]")));
    }
    let (chosen, reason) = if !blind_is_faster(length, profile) {
        (ResetMethod::MeasurementReset, DecisionReason::TooSlow)
    } else if f_clean >= f_req {
        (ResetMethod::BlindReset, DecisionReason::FasterAndClean)
    } else if length <= 1 {
        (ResetMethod::MeasurementReset, DecisionReason::TooDirty)
    } else {
        (ResetMethod::MeasurementReset, DecisionReason::RestrictLength)
    };
    Ok(PolicyDecision { chosen, reason })
}

/// Crossover as a function of the external feedback term.
pub fn ext_sweep(profile: &PlatformProfile, t_ext_values: &[f64]) -> Result<Vec<(f64, usize)>> {
    if t_ext_values.is_empty() {
        return Err(Error::invalid("t_ext sweep needs at least one value"));
    }
    t_ext_values
        .iter()
        .map(|&t| {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::invalid(format!("t_ext = {t} must be finite and >= 0")));
            }
            Ok((t, crossover(&profile.with_t_ext(t))?))
        })
        .collect()
}

/// One line of the crossover summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverRow {
    pub profile: String,
    pub t_gate: f64,
    pub t_meas: f64,
    pub l_star: usize,
    /// `L*` relative to the same stack without external feedback; `None` when
    /// the profile has no external term.
    pub ratio: Option<f64>,
}

pub fn crossover_row(profile: &PlatformProfile) -> Result<CrossoverRow> {
    let l_star = crossover(profile)?;
    let ratio = if profile.t_ext > 0.0 {
        let native = crossover(&profile.with_t_ext(0.0))?;
        (native > 0).then(|| l_star as f64 / native as f64)
    } else {
        None
    };
    Ok(CrossoverRow {
        profile: profile.name.clone(),
        t_gate: profile.t_gate,
        t_meas: measurement_latency(profile),
        l_star,
        ratio,
    })
}

pub fn crossover_table(profiles: &[PlatformProfile]) -> Result<Vec<CrossoverRow>> {
    profiles.iter().map(crossover_row).collect()
}

/// Seconds rendered in the largest unit that keeps the mantissa ≥ 1.
pub fn format_duration(seconds: f64) -> String {
    let (v, unit) = if seconds == 0.0 {
        (0.0, "s")
    } else if seconds < 1e-6 {
        (seconds * 1e9, "ns")
    } else if seconds < 1e-3 {
        (seconds * 1e6, "us")
    } else if seconds < 1.0 {
        (seconds * 1e3, "ms")
    } else {
        (seconds, "s")
    };
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s} {unit}")
}

pub fn render_crossover_table(rows: &[CrossoverRow]) -> String {
    let mut out = format!("{:<10} {:>10} {:>12} {:>5} {:>7}\n", "profile", "t_gate", "T_meas", "L*", "ratio");
    for r in rows {
        let ratio = r.ratio.map_or_else(|| "-".to_string(), |x| format!("{x:.1}x"));
        out.push_str(&format!(
            "{:<10} {:>10} {:>12} {:>5} {:>7}\n",
            r.profile,
            format_duration(r.t_gate),
            format_duration(r.t_meas),
            r.l_star,
            ratio
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blind_latency_examples() {
        assert_eq!(blind_latency(0, &PlatformProfile::iqm()), 0.0);
        assert!((blind_latency(12, &PlatformProfile::iqm()) - 720e-9).abs() < 1e-18);
        assert!((blind_latency(1, &PlatformProfile::ionq()) - 200e-6).abs() < 1e-15);
    }

    #[test]
    fn measurement_latency_examples() {
        assert!((measurement_latency(&PlatformProfile::iqm()) - 730e-9).abs() < 1e-18);
        assert!((measurement_latency(&PlatformProfile::nvqlink()) - 4730e-9).abs() < 1e-18);
        assert_eq!(measurement_latency(&PlatformProfile::rigetti()), 940e-9);
    }

    #[test]
    fn published_crossovers() {
        assert_eq!(crossover(&PlatformProfile::iqm()).unwrap(), 12);
        assert_eq!(crossover(&PlatformProfile::rigetti()).unwrap(), 11);
        assert_eq!(crossover(&PlatformProfile::ionq()).unwrap(), 1);
        assert_eq!(crossover(&PlatformProfile::nvqlink()).unwrap(), 78);
    }

    #[test]
    fn crossover_is_strict_at_exact_break_even() {
        let mut p = PlatformProfile::iqm();
        p.t_meas_total = 720e-9;
        assert_eq!(crossover(&p).unwrap(), 11);
        p.t_meas_total = 50e-9;
        assert_eq!(crossover(&p).unwrap(), 0);
    }

    #[test]
    fn decide_examples() {
        let iqm = PlatformProfile::iqm();
        let d = decide(6, 0.86, 0.75, &iqm).unwrap();
        assert_eq!((d.chosen, d.reason), (ResetMethod::BlindReset, DecisionReason::FasterAndClean));

        for f in [0.0, 0.5, 1.0] {
            let d = decide(20, f, 0.75, &iqm).unwrap();
            assert_eq!((d.chosen, d.reason), (ResetMethod::MeasurementReset, DecisionReason::TooSlow));
        }

        let d = decide(11, 0.8, 0.8, &iqm).unwrap();
        assert_eq!(d.chosen, ResetMethod::BlindReset);

        let d = decide(8, 0.6, 0.75, &iqm).unwrap();
        assert_eq!(d.reason, DecisionReason::RestrictLength);
        let d = decide(1, 0.6, 0.75, &iqm).unwrap();
        assert_eq!(d.reason, DecisionReason::TooDirty);

        assert!(decide(4, 0.9, 1.5, &iqm).is_err());
    }

    #[test]
    fn ext_sweep_examples() {
        let iqm = PlatformProfile::iqm();
        let out = ext_sweep(&iqm, &[0.0, 2e-6, 4e-6]).unwrap();
        assert_eq!(out.iter().map(|x| x.1).collect::<Vec<_>>(), vec![12, 45, 78]);
        assert!(out[1].1 >= 2 * out[0].1);

        let ionq = PlatformProfile::ionq();
        let ts: Vec<f64> = (0..=40).map(|i| i as f64 * 1e-7).collect();
        assert!(ext_sweep(&ionq, &ts).unwrap().iter().all(|&(_, l)| l == 1));
        assert!(ext_sweep(&iqm, &[]).is_err());
    }

    #[test]
    fn table_ratio_column() {
        let rows = crossover_table(&[PlatformProfile::iqm(), PlatformProfile::nvqlink()]).unwrap();
        assert_eq!(rows[0].ratio, None);
        assert!((rows[1].ratio.unwrap() - 6.5).abs() < 1e-12);
        let text = render_crossover_table(&rows);
        assert!(text.contains("6.5x"));
        assert!(text.contains("730 ns"));
    }

    #[test]
    fn durations_render_compactly() {
        assert_eq!(format_duration(30e-9), "30 ns");
        assert_eq!(format_duration(4.73e-6), "4.73 us");
        assert_eq!(format_duration(350e-6), "350 us");
        assert_eq!(format_duration(10.0), "10 s");
    }
}
