//! Density-matrix evolution of the ancilla under platform noise.
//!
//! Gates are ideal unitaries followed by a depolarizing channel and thermal
//! relaxation over the gate duration. Readout is a symmetric confusion channel
//! on the measurement record, sampled binomially.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::su2::{Axis, Gate, Unitary};

const STATE_TOL: f64 = 1e-10;

/// 2×2 Hermitian, unit-trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub [[Complex64; 2]; 2]);

impl DensityMatrix {
    pub fn ground() -> Self {
        Self::diagonal(1.0, 0.0)
    }

    pub fn excited() -> Self {
        Self::diagonal(0.0, 1.0)
    }

    pub fn maximally_mixed() -> Self {
        Self::diagonal(0.5, 0.5)
    }

    pub fn plus() -> Self {
        Self::from_bloch(1.0, 0.0, 0.0)
    }

    pub fn minus() -> Self {
        Self::from_bloch(-1.0, 0.0, 0.0)
    }

    pub fn diagonal(p0: f64, p1: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        DensityMatrix([[Complex64::new(p0, 0.0), z], [z, Complex64::new(p1, 0.0)]])
    }

    /// `(I + x σx + y σy + z σz) / 2`; the vector must lie in the unit ball.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Self {
        DensityMatrix([
            [Complex64::new((1.0 + z) / 2.0, 0.0), Complex64::new(x / 2.0, -y / 2.0)],
            [Complex64::new(x / 2.0, y / 2.0), Complex64::new((1.0 - z) / 2.0, 0.0)],
        ])
    }

    pub fn bloch(&self) -> (f64, f64, f64) {
        let off = self.0[1][0];
        (2.0 * off.re, 2.0 * off.im, self.0[0][0].re - self.0[1][1].re)
    }

    /// ⟨0|ρ|0⟩
    pub fn p0(&self) -> f64 {
        self.0[0][0].re
    }

    /// ⟨1|ρ|1⟩
    pub fn p1(&self) -> f64 {
        self.0[1][1].re
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0].re + self.0[1][1].re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1].norm();
        let mid = (a + d) / 2.0;
        mid - (((a - d) / 2.0).powi(2) + b * b).sqrt()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.0;
        (m[0][1] - m[1][0].conj())
            .norm()
            .max(m[0][0].im.abs())
            .max(m[1][1].im.abs())
    }

    pub fn is_valid(&self) -> bool {
        self.hermiticity_defect() < STATE_TOL
            && (self.trace() - 1.0).abs() < STATE_TOL
            && self.min_eigenvalue() > -STATE_TOL
    }

    /// `U ρ U†`
    pub fn conjugate(&self, u: &Unitary) -> Self {
        let rho = Unitary(self.0);
        DensityMatrix((*u * rho * u.dagger()).0)
    }

    fn mix(&self, other: &Self, weight_other: f64) -> Self {
        let mut out = self.0;
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = *cell * (1.0 - weight_other) + other.0[r][c] * weight_other;
            }
        }
        DensityMatrix(out)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        Unitary(self.0).distance(&Unitary(other.0))
    }
}

/// Coherence, error, and timing parameters for one backend class.
///
/// Times are in seconds. Infinite `t1`/`t2` disable relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlatformProfile {
    pub name: String,
    pub t1: f64,
    pub t2: f64,
    pub gate_error_p: f64,
    pub t_gate: f64,
    /// Aggregated native readout + feedback + preparation path.
    pub t_meas_total: f64,
    pub readout_error: f64,
    /// External feedback latency added to the measurement path.
    pub t_ext: f64,
}

impl PlatformProfile {
    pub fn iqm() -> Self {
        PlatformProfile {
            name: "IQM".into(),
            t1: 40e-6,
            t2: 20e-6,
            gate_error_p: 0.001,
            t_gate: 30e-9,
            t_meas_total: 730e-9,
            readout_error: 0.02,
            t_ext: 0.0,
        }
    }

    pub fn rigetti() -> Self {
        PlatformProfile {
            name: "Rigetti".into(),
            t1: 25e-6,
            t2: 12.5e-6,
            gate_error_p: 0.002,
            t_gate: 40e-9,
            t_meas_total: 940e-9,
            readout_error: 0.03,
            t_ext: 0.0,
        }
    }

    pub fn ionq() -> Self {
        PlatformProfile {
            name: "IonQ".into(),
            t1: 10.0,
            t2: 1.0,
            gate_error_p: 0.0005,
            t_gate: 100e-6,
            t_meas_total: 350e-6,
            readout_error: 0.01,
            t_ext: 0.0,
        }
    }

    /// IQM timing with a 4 µs external feedback link.
    pub fn nvqlink() -> Self {
        PlatformProfile {
            name: "NVQLink".into(),
            t_ext: 4e-6,
            ..Self::iqm()
        }
    }

    /// The three native backends, in reporting order.
    pub fn native() -> Vec<Self> {
        vec![Self::iqm(), Self::rigetti(), Self::ionq()]
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "iqm" => Some(Self::iqm()),
            "rigetti" => Some(Self::rigetti()),
            "ionq" => Some(Self::ionq()),
            "nvqlink" => Some(Self::nvqlink()),
            _ => None,
        }
    }

    /// No decoherence, no gate or readout error; timing copied from IQM.
    pub fn noiseless() -> Self {
        PlatformProfile {
            name: "ideal".into(),
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            gate_error_p: 0.0,
            readout_error: 0.0,
            ..Self::iqm()
        }
    }

    pub fn with_t_ext(&self, t_ext: f64) -> Self {
        PlatformProfile {
            t_ext,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |what: &str, v: f64| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{}: {what} must be > 0, got {v}", self.name)))
            }
        };
        positive("t1", self.t1)?;
        positive("t2", self.t2)?;
        positive("t_gate", self.t_gate)?;
        positive("t_meas_total", self.t_meas_total)?;
        if !self.t_gate.is_finite() || !self.t_meas_total.is_finite() {
            return Err(Error::invalid(format!("{}: gate and readout times must be finite", self.name)));
        }
        if !(self.t_ext >= 0.0 && self.t_ext.is_finite()) {
            return Err(Error::invalid(format!("{}: t_ext must be finite and >= 0", self.name)));
        }
        check_probability("gate_error_p", self.gate_error_p)?;
        check_probability("readout_error", self.readout_error)?;
        check_coherence(self.t1, self.t2)
    }
}

impl fmt::Display for PlatformProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (T1={:e}s T2={:e}s p={} t_gate={:e}s T_meas={:e}s r={} t_ext={:e}s)",
            self.name, self.t1, self.t2, self.gate_error_p, self.t_gate, self.t_meas_total, self.readout_error, self.t_ext
        )
    }
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} = {p} outside [0, 1]")))
    }
}

fn check_coherence(t1: f64, t2: f64) -> Result<()> {
    if t2 > 2.0 * t1 {
        return Err(Error::invalid(format!("unphysical coherence: T2 = {t2} > 2·T1 = {}", 2.0 * t1)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotCounts {
    pub n_zero: u64,
    pub n_one: u64,
    pub shots: u64,
}

impl ShotCounts {
    pub fn fraction_zero(&self) -> f64 {
        self.n_zero as f64 / self.shots as f64
    }
}

/// `(1 − p) ρ + p I/2`
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    check_probability("depolarizing probability", p)?;
    Ok(rho.mix(&DensityMatrix::maximally_mixed(), p))
}

/// Amplitude and phase damping toward |0⟩ over `duration` seconds.
pub fn thermal_relax(rho: &DensityMatrix, t1: f64, t2: f64, duration: f64) -> Result<DensityMatrix> {
    if !(duration >= 0.0) {
        return Err(Error::invalid(format!("duration {duration} must be >= 0")));
    }
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::invalid("T1 and T2 must be > 0"));
    }
    check_coherence(t1, t2)?;
    let population = (-duration / t1).exp();
    let coherence = (-duration / t2).exp();
    let p1 = rho.p1() * population;
    let mut out = rho.0;
    out[1][1] = Complex64::new(p1, 0.0);
    out[0][0] = Complex64::new(1.0 - p1, 0.0);
    out[0][1] *= coherence;
    out[1][0] *= coherence;
    Ok(DensityMatrix(out))
}

/// Ideal rotation, then depolarizing noise, then relaxation over `t_gate`.
pub fn apply_noisy_gate(rho: &DensityMatrix, gate: &Gate, profile: &PlatformProfile) -> Result<DensityMatrix> {
    apply_noisy_unitary(rho, &gate.unitary(), profile)
}

pub(crate) fn apply_noisy_unitary(rho: &DensityMatrix, u: &Unitary, profile: &PlatformProfile) -> Result<DensityMatrix> {
    let rotated = rho.conjugate(u);
    let noisy = depolarize(&rotated, profile.gate_error_p)?;
    thermal_relax(&noisy, profile.t1, profile.t2, profile.t_gate)
}

/// Probability that the Z record reads 0 after symmetric confusion `r`.
pub fn record_zero_probability(rho: &DensityMatrix, readout_error: f64) -> f64 {
    ((1.0 - readout_error) * rho.p0() + readout_error * rho.p1()).clamp(0.0, 1.0)
}

pub fn measure_z<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    readout_error: f64,
    shots: u64,
    stream: &mut R,
) -> Result<ShotCounts> {
    if shots == 0 {
        return Err(Error::invalid("shot count must be at least 1"));
    }
    check_probability("readout_error", readout_error)?;
    let q = record_zero_probability(rho, readout_error);
    let n_zero = Binomial::new(shots, q)
        .map_err(|e| Error::invalid(format!("binomial({shots}, {q}): {e}")))?
        .sample(stream);
    Ok(ShotCounts {
        n_zero,
        n_one: shots - n_zero,
        shots,
    })
}

/// X-basis readout: rotate by `R_y(−π/2)`, then measure Z. `n_zero` counts |+⟩.
pub fn measure_x<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    readout_error: f64,
    shots: u64,
    stream: &mut R,
) -> Result<ShotCounts> {
    let rotated = rho.conjugate(&Unitary::rotation(Axis::Y, -FRAC_PI_2));
    measure_z(&rotated, readout_error, shots, stream)
}
