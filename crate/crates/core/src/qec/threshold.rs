//! Closed-form threshold extrapolation.
//!
//! Ancilla dirt is filtered into the physical channel as
//! `p_eff = p + η(1 − f_clean)`, and logical error scales as
//! `(p_eff / p_th)^((d + 1) / 2)`. Only ratios are meaningful, so every entry
//! is normalized to the first row at d = 3.

use crate::error::{Error, Result};

pub const DEFAULT_ETA: f64 = 0.02;
pub const DEFAULT_P_TH: f64 = 0.029;
pub const DEFAULT_DISTANCES: [usize; 3] = [3, 5, 7];

pub fn effective_error(p_phys: f64, f_clean: f64, eta: f64) -> f64 {
    p_phys + eta * (1.0 - f_clean)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub label: String,
    pub f_clean: f64,
    pub p_eff: f64,
    /// `(distance, normalized p_L)` in the requested order.
    pub normalized: Vec<(usize, f64)>,
}

impl ThresholdRow {
    pub fn at(&self, distance: usize) -> Option<f64> {
        self.normalized.iter().find(|(d, _)| *d == distance).map(|(_, v)| *v)
    }
}

/// Policies in the reference table: measurement reset (the anchor), blind
/// reset at L = 4, and no reset.
pub fn default_rows() -> Vec<(String, f64)> {
    vec![
        ("measurement_reset".to_string(), 0.98),
        ("blind_reset".to_string(), 0.88),
        ("no_reset".to_string(), 0.70),
    ]
}

/// The first row is the anchor: its d = 3 entry is 1.
pub fn threshold_table(
    p_phys: f64,
    eta: f64,
    p_th: f64,
    rows: &[(String, f64)],
    distances: &[usize],
) -> Result<Vec<ThresholdRow>> {
    if !(p_th > 0.0) {
        return Err(Error::invalid(format!("p_th = {p_th} must be > 0")));
    }
    if rows.is_empty() || distances.is_empty() {
        return Err(Error::invalid("threshold table needs at least one row and one distance"));
    }
    if let Some(d) = distances.iter().find(|&&d| d < 3 || d % 2 == 0) {
        return Err(Error::invalid(format!("distance must be odd and >= 3, got {d}")));
    }
    let scale = |p_eff: f64, d: usize| (p_eff / p_th).powi((d as i32 + 1) / 2);
    let anchor = scale(effective_error(p_phys, rows[0].1, eta), 3);
    if !(anchor > 0.0) {
        return Err(Error::invalid("anchor row has zero effective error"));
    }
    Ok(rows
        .iter()
        .map(|(label, f)| {
            let p_eff = effective_error(p_phys, *f, eta);
            ThresholdRow {
                label: label.clone(),
                f_clean: *f,
                p_eff,
                normalized: distances.iter().map(|&d| (d, scale(p_eff, d) / anchor)).collect(),
            }
        })
        .collect())
}

/// Rounds to `digits` significant figures.
pub fn round_sig(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mag = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits as i32 - 1 - mag);
    (x * factor).round() / factor
}

pub fn render_threshold_table(rows: &[ThresholdRow]) -> String {
    let mut out = format!("{:<18} {:>7} {:>9}", "policy", "f_clean", "p_eff");
    if let Some(first) = rows.first() {
        for (d, _) in &first.normalized {
            out.push_str(&format!(" {:>10}", format!("d={d}")));
        }
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{:<18} {:>7.2} {:>9.2e}", r.label, r.f_clean, r.p_eff));
        for (_, v) in &r.normalized {
            out.push_str(&format!(" {:>10}", format!("{:.3}", round_sig(*v, 3)).trim_end_matches('0').trim_end_matches('.')));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_error_examples() {
        assert!((effective_error(1e-3, 0.98, 0.02) - 1.4e-3).abs() < 1e-15);
        assert!((effective_error(1e-3, 0.88, 0.02) - 3.4e-3).abs() < 1e-15);
        assert_eq!(effective_error(1e-3, 1.0, 0.02), 1e-3);
    }

    #[test]
    fn anchor_is_one_and_ratios_follow_the_power_law() {
        let t = threshold_table(1e-3, DEFAULT_ETA, DEFAULT_P_TH, &default_rows(), &DEFAULT_DISTANCES).unwrap();
        assert!((t[0].at(3).unwrap() - 1.0).abs() < 1e-12);
        // independent evaluation
        let x = |f: f64| (1e-3 + 0.02 * (1.0 - f)) / 0.029;
        let blind5 = x(0.88).powi(3) / x(0.98).powi(2);
        assert!((t[1].at(5).unwrap() - blind5).abs() < 1e-12);
        assert_eq!(round_sig(t[1].at(3).unwrap(), 3), 5.9);
        assert_eq!(round_sig(t[2].at(3).unwrap(), 3), 25.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(threshold_table(1e-3, 0.02, 0.0, &default_rows(), &[3]).is_err());
        assert!(threshold_table(1e-3, 0.02, 0.029, &default_rows(), &[4]).is_err());
        assert!(threshold_table(1e-3, 0.02, 0.029, &[], &[3]).is_err());
    }

    #[test]
    fn significant_figures() {
        assert_eq!(round_sig(0.0023305, 3), 0.00233);
        assert_eq!(round_sig(1456.6, 2), 1500.0);
        assert_eq!(round_sig(0.0, 3), 0.0);
    }
}
