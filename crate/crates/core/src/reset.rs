//! Per-window reset policies, λ calibration, and the cleanliness envelope.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::{self, DensityMatrix, PlatformProfile};
use crate::su2::{self, GateSequence, PhaseConvention, Unitary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResetMethod {
    NoReset,
    MeasurementReset,
    BlindReset,
}

impl ResetMethod {
    pub const ALL: [ResetMethod; 3] = [ResetMethod::NoReset, ResetMethod::MeasurementReset, ResetMethod::BlindReset];

    pub fn label(&self) -> &'static str {
        match self {
            ResetMethod::NoReset => "no_reset",
            ResetMethod::MeasurementReset => "measurement_reset",
            ResetMethod::BlindReset => "blind_reset",
        }
    }
}

impl fmt::Display for ResetMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ResetMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_reset" => Ok(ResetMethod::NoReset),
            "measurement_reset" => Ok(ResetMethod::MeasurementReset),
            "blind_reset" => Ok(ResetMethod::BlindReset),
            other => Err(Error::invalid(format!("unknown reset method '{other}'"))),
        }
    }
}

/// Uniform λ grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub points: usize,
    pub min: f64,
    pub max: f64,
}

impl LambdaGrid {
    /// Calibration grid used for benchmark rows.
    pub const BENCHMARK: LambdaGrid = LambdaGrid {
        points: 40,
        min: 0.1,
        max: 4.0,
    };
    /// Dense grid used for landscape analysis.
    pub const LANDSCAPE: LambdaGrid = LambdaGrid {
        points: 200,
        min: 0.1,
        max: 4.0,
    };

    pub fn new(points: usize, min: f64, max: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::invalid("λ grid needs at least 2 points"));
        }
        if !(min > 0.0 && min < max && max.is_finite()) {
            return Err(Error::invalid(format!("λ grid bounds must satisfy 0 < min < max, got [{min}, {max}]")));
        }
        Ok(LambdaGrid { points, min, max })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.value(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaFit {
    pub lambda: f64,
    pub epsilon: f64,
}

/// Grid search for the λ minimising `ε(λ) = ||R(λ) U − I||_F / 2`.
///
/// Ties resolve to the smaller λ.
pub fn optimize_lambda(seq: &GateSequence, grid: LambdaGrid) -> Result<LambdaFit> {
    optimize_lambda_with(seq, grid, PhaseConvention::Sensitive)
}

pub fn optimize_lambda_with(seq: &GateSequence, grid: LambdaGrid, phase: PhaseConvention) -> Result<LambdaFit> {
    LambdaGrid::new(grid.points, grid.min, grid.max)?;
    let base = su2::compose(seq);
    let mut best = LambdaFit {
        lambda: f64::NAN,
        epsilon: f64::INFINITY,
    };
    for lambda in grid.values() {
        let eps = su2::residual_unchecked(&(su2::scale_and_double(seq, lambda)? * base), phase);
        if eps < best.epsilon {
            best = LambdaFit { lambda, epsilon: eps };
        }
    }
    Ok(best)
}

/// One row of the benchmark: cleanliness of a single reset window.
#[derive(Debug, Clone, PartialEq)]
pub struct ResetOutcome {
    pub backend: String,
    pub method: ResetMethod,
    pub seed: u64,
    pub sequence_length: usize,
    pub p_zero: f64,
    pub p_x: f64,
    pub unitary_error: f64,
    /// `None` for policies that do not use a scale factor.
    pub lambda_used: Option<f64>,
    pub shots: u64,
}

/// Evolves |0⟩ through the noisy base sequence.
pub fn evolve_sequence(seq: &GateSequence, profile: &PlatformProfile) -> Result<DensityMatrix> {
    seq.gates()
        .iter()
        .try_fold(DensityMatrix::ground(), |rho, g| noise::apply_noisy_gate(&rho, g, profile))
}

/// Applies the scaled block `R(λ)` gate by gate: 2L further noisy rotations.
pub fn evolve_blind_block(
    rho: &DensityMatrix,
    seq: &GateSequence,
    lambda: f64,
    profile: &PlatformProfile,
) -> Result<DensityMatrix> {
    let mut out = *rho;
    for _ in 0..2 {
        for g in seq.gates() {
            out = noise::apply_noisy_unitary(&out, &g.scaled_unitary(lambda), profile)?;
        }
    }
    Ok(out)
}

/// Projective Z readout, conditional X on a |1⟩ record, then the idle
/// relaxation of the native measurement path.
pub fn measurement_reset(rho: &DensityMatrix, profile: &PlatformProfile) -> Result<DensityMatrix> {
    let r = profile.readout_error;
    let (p0, p1) = (rho.p0(), rho.p1());
    let kept_weight = p0 * (1.0 - r) + p1 * r;
    let flipped_weight = p0 * r + p1 * (1.0 - r);

    let kept = if kept_weight > 0.0 {
        DensityMatrix::diagonal(p0 * (1.0 - r) / kept_weight, p1 * r / kept_weight)
    } else {
        DensityMatrix::ground()
    };
    let flipped = if flipped_weight > 0.0 {
        let pre = DensityMatrix::diagonal(p0 * r / flipped_weight, p1 * (1.0 - r) / flipped_weight);
        noise::apply_noisy_unitary(&pre, &Unitary::rotation(su2::Axis::X, std::f64::consts::PI), profile)?
    } else {
        DensityMatrix::ground()
    };

    let mut merged = kept.0;
    for (row, frow) in merged.iter_mut().zip(flipped.0.iter()) {
        for (cell, f) in row.iter_mut().zip(frow.iter()) {
            *cell = *cell * kept_weight + *f * flipped_weight;
        }
    }
    noise::thermal_relax(&DensityMatrix(merged), profile.t1, profile.t2, profile.t_meas_total)
}

/// Final ancilla state for a policy, before readout.
pub fn reset_state(
    seq: &GateSequence,
    method: ResetMethod,
    profile: &PlatformProfile,
    fit: Option<&LambdaFit>,
) -> Result<DensityMatrix> {
    let evolved = evolve_sequence(seq, profile)?;
    match method {
        ResetMethod::NoReset => Ok(evolved),
        ResetMethod::MeasurementReset => measurement_reset(&evolved, profile),
        ResetMethod::BlindReset => {
            let fit = fit.ok_or_else(|| Error::invalid("blind reset requires a calibrated λ"))?;
            evolve_blind_block(&evolved, seq, fit.lambda, profile)
        }
    }
}

/// Simulates one reset window and samples Z- and X-basis shots.
///
/// Blind reset replays the λ from `fit`, calibrated offline on the noiseless
/// unitary. Non-blind rows record the residual of leaving `U` uncorrected.
pub fn run_reset_cycle<R: Rng + ?Sized>(
    seq: &GateSequence,
    method: ResetMethod,
    profile: &PlatformProfile,
    shots: u64,
    fit: Option<&LambdaFit>,
    stream: &mut R,
) -> Result<ResetOutcome> {
    if shots == 0 {
        return Err(Error::invalid("shot count must be at least 1"));
    }
    let state = reset_state(seq, method, profile, fit)?;
    let z = noise::measure_z(&state, profile.readout_error, shots, stream)?;
    let x = noise::measure_x(&state, profile.readout_error, shots, stream)?;

    let (unitary_error, lambda_used) = match method {
        ResetMethod::BlindReset => {
            let fit = fit.expect("checked by reset_state");
            (fit.epsilon, Some(fit.lambda))
        }
        _ => (
            su2::residual_unchecked(&su2::compose(seq), PhaseConvention::Sensitive),
            None,
        ),
    };

    Ok(ResetOutcome {
        backend: profile.name.clone(),
        method,
        seed: seq.seed(),
        sequence_length: seq.len(),
        p_zero: z.fraction_zero(),
        p_x: x.fraction_zero(),
        unitary_error,
        lambda_used,
        shots,
    })
}

/// `½ + [(1 − ε)² − ½](1 − p)^{2L}`, clamped to `[0, 1]`.
pub fn envelope(epsilon: f64, p: f64, length: usize) -> f64 {
    let coherent = (1.0 - epsilon).powi(2) - 0.5;
    let incoherent = (1.0 - p).powi(2 * length as i32);
    (0.5 + coherent * incoherent).clamp(0.0, 1.0)
}

pub const DEFAULT_ENVELOPE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeVerdict {
    Consistent,
    /// Amount by which cleanliness exceeds `envelope + margin`.
    Violation(f64),
}

pub fn envelope_check(outcome: &ResetOutcome, gate_error_p: f64, margin: f64) -> Result<EnvelopeVerdict> {
    if outcome.method != ResetMethod::BlindReset {
        return Err(Error::invalid("envelope screening applies to blind-reset rows only"));
    }
    let bound = envelope(outcome.unitary_error, gate_error_p, outcome.sequence_length) + margin;
    let excess = outcome.p_zero - bound;
    Ok(if excess > 0.0 {
        EnvelopeVerdict::Violation(excess)
    } else {
        EnvelopeVerdict::Consistent
    })
}
